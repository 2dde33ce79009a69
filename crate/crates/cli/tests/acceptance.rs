//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tifair::dataset::{Dataset, GroupPartition, PartitionMode};
use tifair::fairness::{
    gaussian_moments, kl_symmetric_gauss, kl_symmetric_hist, regularizer_dp, regularizer_eo, soft_histogram,
    GaussianMoments, HistogramParams, VARIANCE_FLOOR,
};
use tifair::metrics::{bound_check_dp, bound_check_eo, parity_report, threshold_grid, DiscreteDensity, ParityKind};
use tifair::model::rbf_gram_matrix;
use tifair::reference::{exhaustive_parity, finite_diff, hard_histogram};
use tifair::training::{loss_ksvm, loss_lr, loss_lsvm, FairnessMode, LossEval, ModelKind, TrainConfig};
use tifair::{KernelModel, LinearModel, Matrix, Method, RiskScore};
use tifair_cli::{load_experiment, sweep_model, train_and_evaluate, Experiment, ExperimentConfig};

struct Outcome {
    id: u8,
    pass: bool,
    detail: String,
}

fn outcome(id: u8, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------------------
// Random instances

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let m = rng.gen_range(8..24);
    let dim = rng.gen_range(1..5);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect())
        .collect();
    // Every (A, Y) cell gets at least two samples.
    let labels = (0..m).map(|i| ((i / 2) % 2) as u8).collect();
    let protected = (0..m).map(|i| (i % 2) as u8).collect();
    Dataset::from_parts(Matrix::from_rows(&rows).unwrap(), labels, protected).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng, i: usize) -> TrainConfig {
    let fairness_mode = [FairnessMode::None, FairnessMode::Dp, FairnessMode::Eo][i % 3];
    TrainConfig {
        fairness_mode,
        method: if (i / 3).is_multiple_of(2) { Method::Gaussian } else { Method::Histogram },
        eta: rng.gen_range(0.1..3.0),
        lambda: Some(rng.gen_range(0.001..0.2)),
        ..TrainConfig::default()
    }
}

fn partition_for(ds: &Dataset, mode: FairnessMode) -> Option<GroupPartition> {
    mode.partition_mode()
        .map(|m| GroupPartition::from_attributes(ds.protected(), ds.labels(), m).unwrap())
}

fn near_kink(raw: &[f64], labels: &[u8]) -> bool {
    raw.iter().zip(labels).any(|(g, &y)| {
        let y = if y == 1 { 1.0 } else { -1.0 };
        (1.0 - y * g).abs() < 1e-3
    })
}

fn gradient_ok(analytic: &[f64], numeric: &[f64]) -> bool {
    analytic
        .iter()
        .zip(numeric)
        .all(|(a, n)| (a - n).abs() <= 1e-4 * a.abs().max(n.abs()) + 1e-7)
}

fn flat_gradient(e: &LossEval) -> Vec<f64> {
    let mut g = e.grad.clone();
    g.push(e.grad_bias);
    g
}

fn linear_from(theta: &[f64]) -> LinearModel {
    LinearModel {
        weights: theta[..theta.len() - 1].to_vec(),
        bias: theta[theta.len() - 1],
    }
}

// ---------------------------------------------------------------------------
// 6. Gradient oracles

fn criterion_gradients() -> Outcome {
    const NEEDED: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut counts = [0usize; 5];

    let mut attempts = 0;
    while counts[..3].iter().any(|&c| c < NEEDED) && attempts < 10_000 {
        attempts += 1;
        let ds = random_dataset(&mut rng);
        let cfg = random_config(&mut rng, attempts);
        let partition = partition_for(&ds, cfg.fairness_mode);
        let p = partition.as_ref();

        let theta: Vec<f64> = (0..=ds.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if counts[0] < NEEDED {
            let e = loss_lr(&linear_from(&theta), &ds, p, &cfg).unwrap();
            let n = finite_diff(|t| loss_lr(&linear_from(t), &ds, p, &cfg).unwrap().total, &theta, 1e-5).unwrap();
            if !gradient_ok(&flat_gradient(&e), &n) {
                failures.push(format!("loss_lr #{}", counts[0]));
            }
            counts[0] += 1;
        }
        let raw: Vec<f64> = ds.features().iter_rows().map(|x| linear_from(&theta).raw_score(x).unwrap()).collect();
        if counts[1] < NEEDED && !near_kink(&raw, ds.labels()) {
            let e = loss_lsvm(&linear_from(&theta), &ds, p, &cfg).unwrap();
            let n = finite_diff(|t| loss_lsvm(&linear_from(t), &ds, p, &cfg).unwrap().total, &theta, 1e-5).unwrap();
            if !gradient_ok(&flat_gradient(&e), &n) {
                failures.push(format!("loss_lsvm #{}", counts[1]));
            }
            counts[1] += 1;
        }

        let m = ds.len();
        let gram = rbf_gram_matrix(ds.features(), cfg.gamma).unwrap();
        let theta: Vec<f64> = (0..=m).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let kernel = |t: &[f64]| KernelModel::new(t[..m].to_vec(), t[m], ds.features().clone(), cfg.gamma).unwrap();
        let raw: Vec<f64> = gram.mul_vec(&theta[..m]).unwrap().iter().map(|g| g + theta[m]).collect();
        if counts[2] < NEEDED && !near_kink(&raw, ds.labels()) {
            let e = loss_ksvm(&kernel(&theta), &ds, p, &cfg, &gram).unwrap();
            let n = finite_diff(|t| loss_ksvm(&kernel(t), &ds, p, &cfg, &gram).unwrap().total, &theta, 1e-5).unwrap();
            if !gradient_ok(&flat_gradient(&e), &n) {
                failures.push(format!("loss_ksvm #{}", counts[2]));
            }
            counts[2] += 1;
        }
    }

    let params = HistogramParams::default();
    for i in 0..2 * NEEDED {
        let ds = random_dataset(&mut rng);
        let raw: Vec<f64> = (0..ds.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let method = if i % 2 == 0 { Method::Gaussian } else { Method::Histogram };
        let (slot, mode) = if i < NEEDED {
            (3, PartitionMode::DemographicParity)
        } else {
            (4, PartitionMode::EqualizedOdds)
        };
        let p = GroupPartition::from_attributes(ds.protected(), ds.labels(), mode).unwrap();
        let f = |r: &[f64]| match mode {
            PartitionMode::DemographicParity => regularizer_dp(r, &p, method, &params).unwrap(),
            PartitionMode::EqualizedOdds => regularizer_eo(r, &p, method, &params).unwrap(),
        };
        let n = finite_diff(|r| f(r).value, &raw, 1e-5).unwrap();
        if !gradient_ok(&f(&raw).gradient, &n) {
            failures.push(format!("regularizer {mode:?} {method:?} #{i}"));
        }
        counts[slot] += 1;
    }

    let detail = format!(
        "instances lr={} lsvm={} ksvm={} reg_dp={} reg_eo={}; mismatches: {}",
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4],
        if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
    );
    outcome(6, failures.is_empty() && counts.iter().all(|&c| c >= NEEDED), detail)
}

// ---------------------------------------------------------------------------
// 7. Distance axioms

fn random_scores(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<RiskScore> {
    let n = rng.gen_range(1..max_len);
    (0..n).map(|_| RiskScore::new(rng.gen_range(0.0..=1.0)).unwrap()).collect()
}

fn criterion_distances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_negative = 0.0f64;
    let mut worst_asym = 0.0f64;
    let mut worst_self = 0.0f64;
    let trials = 5000;
    for i in 0..trials {
        let n_bins = rng.gen_range(2..40);
        let params = HistogramParams::with_bins(n_bins);
        let a = random_scores(&mut rng, 60);
        let b = if i % 10 == 0 { a.clone() } else { random_scores(&mut rng, 60) };
        let (ha, hb) = (soft_histogram(&a, &params).unwrap(), soft_histogram(&b, &params).unwrap());
        let (dab, dba) = (kl_symmetric_hist(&ha, &hb).unwrap(), kl_symmetric_hist(&hb, &ha).unwrap());
        worst_negative = worst_negative.min(dab).min(dba);
        worst_asym = worst_asym.max((dab - dba).abs());
        worst_self = worst_self.max(kl_symmetric_hist(&ha, &ha).unwrap().abs());

        let m0 = if i % 3 == 0 {
            let g: Vec<f64> = (0..rng.gen_range(2..50)).map(|_| rng.gen_range(-5.0..5.0)).collect();
            gaussian_moments(&g).unwrap()
        } else {
            GaussianMoments {
                mu: rng.gen_range(-5.0..5.0),
                var: rng.gen_range(VARIANCE_FLOOR..10.0),
                count: 2,
            }
        };
        let m1 = match i % 4 {
            0 => m0,
            1 => GaussianMoments {
                mu: m0.mu + rng.gen_range(-1e-9..1e-9),
                var: m0.var * (1.0 + rng.gen_range(-1e-9..1e-9)),
                count: 2,
            },
            _ => GaussianMoments {
                mu: rng.gen_range(-5.0..5.0),
                var: rng.gen_range(VARIANCE_FLOOR..10.0),
                count: 2,
            },
        };
        let (dab, dba) = (kl_symmetric_gauss(&m0, &m1).unwrap(), kl_symmetric_gauss(&m1, &m0).unwrap());
        worst_negative = worst_negative.min(dab).min(dba);
        worst_asym = worst_asym.max((dab - dba).abs());
        worst_self = worst_self.max(kl_symmetric_gauss(&m0, &m0).unwrap().abs());
    }
    let pass = worst_negative >= 0.0 && worst_asym == 0.0 && worst_self <= 1e-12;
    outcome(
        7,
        pass,
        format!(
            "{trials} HA + {trials} GA pairs: min d={worst_negative:e}, max |d(p,q)-d(q,p)|={worst_asym:e}, max d(p,p)={worst_self:e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Bound soundness

fn random_partition(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let cells = rng.gen_range(1..50);
    if rng.gen_bool(0.5) {
        return DiscreteDensity::uniform_edges(cells);
    }
    let mut inner: Vec<f64> = (0..cells - 1).map(|_| rng.gen_range(0.001..0.999)).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut edges = vec![0.0];
    edges.extend(inner);
    edges.push(1.0);
    edges
}

fn random_density(rng: &mut ChaCha8Rng, edges: &[f64]) -> DiscreteDensity {
    let raw: Vec<f64> = (0..edges.len() - 1)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let mut raw = raw;
    if raw.iter().all(|&m| m == 0.0) {
        raw[0] = 1.0;
    }
    let total: f64 = raw.iter().sum();
    DiscreteDensity::new(edges.to_vec(), raw.iter().map(|m| m / total).collect()).unwrap()
}

fn criterion_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = threshold_grid(0.0, 1.0, 101).unwrap();
    let mut worst_dp = f64::INFINITY;
    let mut worst_eo = f64::INFINITY;
    for _ in 0..1000 {
        let edges = random_partition(&mut rng);
        let mut t = grid.clone();
        t.extend_from_slice(&edges);
        let d: Vec<DiscreteDensity> = (0..4).map(|_| random_density(&mut rng, &edges)).collect();
        worst_dp = worst_dp.min(bound_check_dp(&d[0], &d[1], &t).unwrap().min_slack());
        worst_eo = worst_eo.min(bound_check_eo((&d[0], &d[1]), (&d[2], &d[3]), &t).unwrap().min_slack());
    }
    outcome(
        8,
        worst_dp >= -1e-12 && worst_eo >= -1e-12,
        format!("1000 density pairs: min DP slack={worst_dp:e}, min EO slack={worst_eo:e}"),
    )
}

// ---------------------------------------------------------------------------
// 9. Histogram consistency

fn criterion_histograms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_l1_final = 0.0f64;
    let mut converging = true;
    let mut worst_sum = 0.0f64;
    for _ in 0..200 {
        let n_bins = rng.gen_range(2..30);
        let delta = 1.0 / n_bins as f64;
        // Interior scores: essentially at bin centers, far from every edge.
        let values: Vec<f64> = (0..rng.gen_range(5..80))
            .map(|_| (rng.gen_range(0..n_bins) as f64 + 0.5) * delta + rng.gen_range(-1e-7..1e-7) * delta)
            .collect();
        let scores: Vec<RiskScore> = values.iter().map(|&v| RiskScore::new(v).unwrap()).collect();
        let hard = hard_histogram(&values, n_bins).unwrap();
        worst_sum = worst_sum.max((hard.mass.iter().sum::<f64>() - 1.0).abs());
        let mut l1_values = Vec::new();
        for divisor in [2.0, 4.0, 10.0, 100.0, 1000.0] {
            let params = HistogramParams {
                sigma_c: delta / divisor,
                ..HistogramParams::with_bins(n_bins)
            };
            let soft = soft_histogram(&scores, &params).unwrap();
            worst_sum = worst_sum.max((soft.mass.iter().sum::<f64>() - 1.0).abs());
            let l1: f64 = soft.mass.iter().zip(&hard.mass).map(|(a, b)| (a - b).abs()).sum();
            l1_values.push(l1);
        }
        let last = l1_values[l1_values.len() - 1];
        converging &= last < l1_values[0];
        worst_l1_final = worst_l1_final.max(last);
    }
    for _ in 0..1000 {
        let params = HistogramParams::with_bins(rng.gen_range(2..50));
        let scores = random_scores(&mut rng, 100);
        let soft = soft_histogram(&scores, &params).unwrap();
        worst_sum = worst_sum.max((soft.mass.iter().sum::<f64>() - 1.0).abs());
    }
    outcome(
        9,
        worst_l1_final < 1e-6 && converging && worst_sum <= 1e-9,
        format!(
            "max L1(soft, hard) at sigma=delta/1000: {worst_l1_final:e}; below the sigma=delta/2 value on every input: {converging}; max |sum-1|={worst_sum:e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. Oracle equivalence

fn criterion_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut eo_mismatch = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..60);
        let t = if rng.gen_bool(0.2) { 0.5 } else { rng.gen_range(0.0..1.0) };
        let values: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.1) { t } else { rng.gen_range(0.0..=1.0) })
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let mut protected: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        protected[0] = 0;
        protected[1] = 1;
        let scores: Vec<RiskScore> = values.iter().map(|&v| RiskScore::new(v).unwrap()).collect();
        let r = parity_report(&scores, &labels, &protected, t).unwrap();
        let (dp, eo) = exhaustive_parity(&values, &labels, &protected, t).unwrap();
        worst = worst.max((r.delta_dp - dp).abs());
        match (r.delta_eo, eo) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            _ => eo_mismatch += 1,
        }
    }

    let mut bit_mismatch = 0;
    let mut checked = 0;
    for i in 0..60 {
        let ds = random_dataset(&mut rng);
        let base = TrainConfig {
            lambda: Some(rng.gen_range(0.001..0.2)),
            ..TrainConfig::default()
        };
        let theta: Vec<f64> = (0..=ds.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = ds.len();
        let gram = rbf_gram_matrix(ds.features(), base.gamma).unwrap();
        let alpha: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let kernel = KernelModel::new(alpha, 0.1, ds.features().clone(), base.gamma).unwrap();
        let linear = linear_from(&theta);
        for mode in [FairnessMode::Dp, FairnessMode::Eo] {
            let cfg = TrainConfig {
                fairness_mode: mode,
                method: if i % 2 == 0 { Method::Gaussian } else { Method::Histogram },
                eta: 0.0,
                ..base.clone()
            };
            let p = partition_for(&ds, mode);
            let pairs = [
                (loss_lr(&linear, &ds, p.as_ref(), &cfg), loss_lr(&linear, &ds, None, &base)),
                (loss_lsvm(&linear, &ds, p.as_ref(), &cfg), loss_lsvm(&linear, &ds, None, &base)),
                (
                    loss_ksvm(&kernel, &ds, p.as_ref(), &cfg, &gram),
                    loss_ksvm(&kernel, &ds, None, &base, &gram),
                ),
            ];
            for (a, b) in pairs {
                let (a, b) = (a.unwrap(), b.unwrap());
                checked += 1;
                let same = a.total.to_bits() == b.total.to_bits()
                    && a.grad_bias.to_bits() == b.grad_bias.to_bits()
                    && a.grad.iter().zip(&b.grad).all(|(x, y)| x.to_bits() == y.to_bits());
                bit_mismatch += usize::from(!same);
            }
        }
    }
    outcome(
        10,
        worst <= 1e-12 && eo_mismatch == 0 && bit_mismatch == 0,
        format!(
            "10000 parity instances: max diff={worst:e}, EO definedness mismatches={eo_mismatch}; eta=0 losses: {bit_mismatch}/{checked} not bit-identical"
        ),
    )
}

// ---------------------------------------------------------------------------
// 1-5. COMPAS reproduction

struct Run {
    eta: f64,
    accuracy: f64,
    delta: f64,
    std: f64,
}

fn evaluate(cfg: &ExperimentConfig, exp: &Experiment, kind: ParityKind) -> Option<Run> {
    let (report, parity) = train_and_evaluate(cfg, exp).ok()?;
    let sweep = sweep_model(
        &report.final_model,
        &exp.test,
        kind,
        cfg.sweep_t_min,
        cfg.sweep_t_max,
        cfg.sweep_steps,
    )
    .ok()?;
    let delta = match kind {
        ParityKind::Dp => parity.delta_dp,
        ParityKind::Eo => parity.delta_eo?,
    };
    Some(Run {
        eta: cfg.eta,
        accuracy: parity.accuracy,
        delta,
        std: sweep.std,
    })
}

fn dense_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=100).map(|i| i as f64 * 0.005).collect();
    g.extend((6..=10).map(|i| i as f64 * 0.1));
    g.extend([1.5, 2.0, 3.0, 4.0, 5.0]);
    g
}

fn kernel_grid() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 3.0, 5.0]
}

struct Search {
    label: String,
    /// First run meeting the parity and accuracy targets.
    feasible: Option<Run>,
    /// First run also meeting the sweep-STD target.
    joint: Option<Run>,
    closest: Option<Run>,
}

struct Target {
    kind: ParityKind,
    max_delta: f64,
    min_accuracy: f64,
    max_std: f64,
}

fn search(base: &ExperimentConfig, exp: &Experiment, model: ModelKind, method: Method, target: &Target) -> Search {
    let Target {
        kind,
        max_delta,
        min_accuracy,
        max_std,
    } = *target;
    let grid = if model == ModelKind::Ksvm { kernel_grid() } else { dense_grid() };
    let fairness = match kind {
        ParityKind::Dp => FairnessMode::Dp,
        ParityKind::Eo => FairnessMode::Eo,
    };
    let mut out = Search {
        label: format!("{model:?}-{}", if method == Method::Histogram { "HA" } else { "GA" }).to_uppercase(),
        feasible: None,
        joint: None,
        closest: None,
    };
    for eta in grid {
        let cfg = ExperimentConfig {
            model,
            method,
            fairness,
            eta,
            ..base.clone()
        };
        let Some(run) = evaluate(&cfg, exp, kind) else { continue };
        let meets = run.delta <= max_delta && run.accuracy >= min_accuracy;
        if meets && run.std <= max_std {
            out.joint = Some(run);
            return out;
        }
        if meets {
            if out.feasible.is_none() {
                out.feasible = Some(run);
            }
            continue;
        }
        if run.accuracy >= min_accuracy && out.closest.as_ref().is_none_or(|c| run.delta < c.delta) {
            out.closest = Some(run);
        }
    }
    out
}

fn describe(r: &Run) -> String {
    format!("eta={} acc={:.3} delta={:.3} std={:.4}", r.eta, r.accuracy, r.delta, r.std)
}

fn compas(outcomes: &mut Vec<Outcome>) {
    let config_path = repo_root().join("configs/compas.toml");
    let base = match ExperimentConfig::load(&config_path, &[]) {
        Ok(c) => c,
        Err(e) => {
            for id in 1..=5 {
                outcomes.push(outcome(id, false, format!("cannot load config: {e}")));
            }
            return;
        }
    };
    let exp = match load_experiment(&base) {
        Ok(e) => e,
        Err(e) => {
            for id in 1..=5 {
                outcomes.push(outcome(id, false, format!("cannot load dataset: {e}")));
            }
            return;
        }
    };

    let baseline_dp = evaluate(&base, &exp, ParityKind::Dp).expect("baseline trains");
    let baseline_eo = evaluate(&base, &exp, ParityKind::Eo).expect("baseline trains");
    let acc = baseline_dp.accuracy;
    outcomes.push(outcome(
        1,
        (acc - 0.684).abs() <= 0.025 && (baseline_dp.delta - 0.225).abs() <= 0.05 && (baseline_eo.delta - 0.188).abs() <= 0.05,
        format!(
            "LR baseline (test split, seed {}): acc={acc:.4} dDP={:.4} dEO={:.4}",
            base.seed, baseline_dp.delta, baseline_eo.delta
        ),
    ));

    let mut c4_failures = Vec::new();
    let mut c4_details = Vec::new();
    for (id, kind, max_delta, min_acc, base_std) in [
        (2u8, ParityKind::Dp, 0.10, 0.54, baseline_dp.std),
        (3u8, ParityKind::Eo, 0.15, 0.60, baseline_eo.std),
    ] {
        let mut details = Vec::new();
        let mut all = true;
        for model in [ModelKind::Lr, ModelKind::Lsvm, ModelKind::Ksvm] {
            for method in [Method::Histogram, Method::Gaussian] {
                let started = Instant::now();
                let target = Target {
                    kind,
                    max_delta,
                    min_accuracy: min_acc,
                    max_std: 0.5 * base_std,
                };
                let s = search(&base, &exp, model, method, &target);
                let took = started.elapsed().as_secs();
                match (&s.joint, &s.feasible) {
                    (Some(r), _) => {
                        details.push(format!("{} {}", s.label, describe(r)));
                        c4_details.push(format!("{} {:?} std={:.4}", s.label, kind, r.std));
                    }
                    (None, Some(r)) => {
                        details.push(format!("{} {}", s.label, describe(r)));
                        c4_failures.push(format!("{} {:?} std={:.4}", s.label, kind, r.std));
                    }
                    (None, None) => {
                        all = false;
                        let near = s.closest.as_ref().map_or("no run met the accuracy floor".into(), describe);
                        details.push(format!("{} none (closest {near})", s.label));
                        c4_failures.push(format!("{} {:?} no qualifying model", s.label, kind));
                    }
                }
                eprintln!("  searched {} {:?} in {took}s", s.label, kind);
            }
        }
        outcomes.push(outcome(id, all, details.join("; ")));
    }
    outcomes.push(outcome(
        4,
        c4_failures.is_empty(),
        format!(
            "limits DP std<={:.4}, EO std<={:.4}; ok: [{}]; failing: [{}]",
            0.5 * baseline_dp.std,
            0.5 * baseline_eo.std,
            c4_details.join(", "),
            c4_failures.join(", ")
        ),
    ));

    let mut curve = Vec::new();
    for eta in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let cfg = ExperimentConfig {
            fairness: FairnessMode::Dp,
            method: Method::Gaussian,
            eta,
            ..base.clone()
        };
        curve.push(evaluate(&cfg, &exp, ParityKind::Dp));
    }
    let detail_curve: Vec<String> = curve
        .iter()
        .map(|r| r.as_ref().map_or("failed".into(), |r| format!("{}:{:.3}/{:.3}", r.eta, r.accuracy, r.delta)))
        .collect();
    let c5 = match (&curve[0], &curve[4]) {
        (Some(first), Some(last)) => {
            let ratio_ok = last.delta <= 0.4 * first.delta;
            let drop = curve
                .iter()
                .flatten()
                .find(|r| r.delta <= 0.10)
                .map(|r| first.accuracy - r.accuracy);
            let drop_ok = drop.is_some_and(|d| d <= 0.15);
            outcome(
                5,
                ratio_ok && drop_ok,
                format!(
                    "LR-GA DP eta:acc/dDP [{}]; dDP(5)/dDP(0)={:.3}; accuracy drop to first dDP<=0.10: {}",
                    detail_curve.join(" "),
                    last.delta / first.delta,
                    drop.map_or("none reached".into(), |d| format!("{d:.3}"))
                ),
            )
        }
        _ => outcome(5, false, format!("training failed: [{}]", detail_curve.join(" "))),
    };
    outcomes.push(c5);
}

// ---------------------------------------------------------------------------
// 11. Determinism

fn run_cli(out: &Path, args: &[&str]) -> Result<(), String> {
    let config = repo_root().join("configs/compas.toml");
    let status = Command::new(env!("CARGO_BIN_EXE_tifair"))
        .arg("--config")
        .arg(&config)
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    Ok(())
}

fn run_all_commands(out: &Path) -> Result<(), String> {
    run_cli(out, &["train"])?;
    let model = out.join("model.txt");
    let model = model.to_str().unwrap();
    run_cli(out, &["sweep", "--model", model, "--kind", "dp"])?;
    run_cli(out, &["sweep", "--model", model, "--kind", "eo"])?;
    run_cli(out, &["riskdist", "--model", model, "--mode", "eo"])?;
    run_cli(out, &["--set", "fairness=dp", "--set", "method=ha", "tradeoff", "--etas", "0,0.2"])?;
    let kernel = out.join("ksvm");
    run_cli(&kernel, &["--set", "model=ksvm", "--set", "max_iters=30", "--set", "fairness=eo", "--set", "eta=0.5", "train"])
}

fn collect_files(dir: &Path, acc: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(&path, acc);
        } else {
            acc.push(path);
        }
    }
}

fn criterion_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    if let Err(e) = run_all_commands(&a).and_then(|_| run_all_commands(&b)) {
        return outcome(11, false, format!("command failed: {e}"));
    }
    let mut files = Vec::new();
    collect_files(&a, &mut files);
    files.sort();
    let mut differing = Vec::new();
    for f in &files {
        let rel = f.strip_prefix(&a).unwrap();
        if fs::read(f).ok() != fs::read(b.join(rel)).ok() {
            differing.push(rel.display().to_string());
        }
    }
    outcome(
        11,
        differing.is_empty() && !files.is_empty(),
        format!("{} output files compared; differing: {differing:?}", files.len()),
    )
}

fn main() -> ExitCode {
    let mut outcomes = vec![
        criterion_gradients(),
        criterion_distances(),
        criterion_bounds(),
        criterion_histograms(),
        criterion_oracles(),
    ];
    compas(&mut outcomes);
    outcomes.push(criterion_determinism());
    outcomes.sort_by_key(|o| o.id);

    println!();
    for o in &outcomes {
        println!("criterion {:>2}: {} | {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
