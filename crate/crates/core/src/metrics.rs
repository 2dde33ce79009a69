//! Accuracy, Calders–Verwer parity scores, threshold sweeps and the
//! density-gap bounds on parity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{predict, RiskScore};

pub const DEFAULT_SWEEP_MIN: f64 = 0.3;
pub const DEFAULT_SWEEP_MAX: f64 = 0.7;
pub const DEFAULT_SWEEP_STEPS: usize = 41;
/// Cells of the hard histogram used to estimate densities from samples.
pub const DEFAULT_DENSITY_CELLS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityKind {
    Dp,
    Eo,
}

/// Positive-prediction rates. `by_label[a][y]` is `P(Ŷ=1 | A=a, Y=y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub positive: [f64; 2],
    /// `None` when some `(A, Y)` cell is empty.
    pub by_label: Option<[[f64; 2]; 2]>,
}

impl GroupRates {
    pub fn delta_dp(&self) -> f64 {
        (self.positive[0] - self.positive[1]).abs()
    }

    pub fn delta_eo(&self) -> Option<f64> {
        self.by_label
            .map(|r| 0.5 * ((r[0][0] - r[1][0]).abs() + (r[0][1] - r[1][1]).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub threshold: f64,
    pub accuracy: f64,
    pub delta_dp: f64,
    pub delta_eo: Option<f64>,
    pub group_rates: GroupRates,
}

fn check_lengths(scores: usize, labels: usize, protected: usize) -> Result<()> {
    for n in [labels, protected] {
        if n != scores {
            return Err(Error::DimensionMismatch {
                expected: scores,
                actual: n,
            });
        }
    }
    Ok(())
}

/// Accuracy and parity at one threshold. Fails if a protected group is
/// empty; ΔEO is `None` if any `(A, Y)` cell is empty.
pub fn parity_report(scores: &[RiskScore], labels: &[u8], protected: &[u8], threshold: f64) -> Result<ParityReport> {
    check_lengths(scores.len(), labels.len(), protected.len())?;
    let mut total = [[0usize; 2]; 2];
    let mut positive = [[0usize; 2]; 2];
    let mut correct = 0usize;
    for ((&s, &y), &a) in scores.iter().zip(labels).zip(protected) {
        let (a, y) = (usize::from(a), usize::from(y));
        if a > 1 || y > 1 {
            return Err(Error::InvalidArgument(format!("non-binary attribute A={a} Y={y}")));
        }
        let p = predict(s, threshold)?;
        total[a][y] += 1;
        positive[a][y] += usize::from(p);
        correct += usize::from(usize::from(p) == y);
    }
    let mut rate = [0.0; 2];
    for a in 0..2 {
        let n = total[a][0] + total[a][1];
        if n == 0 {
            return Err(Error::EmptyGroup(format!("A={a}")));
        }
        rate[a] = (positive[a][0] + positive[a][1]) as f64 / n as f64;
    }
    let by_label = if total.iter().flatten().all(|&n| n > 0) {
        let r = |a: usize, y: usize| positive[a][y] as f64 / total[a][y] as f64;
        Some([[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]])
    } else {
        None
    };
    let group_rates = GroupRates {
        positive: rate,
        by_label,
    };
    Ok(ParityReport {
        threshold,
        accuracy: correct as f64 / scores.len() as f64,
        delta_dp: group_rates.delta_dp(),
        delta_eo: group_rates.delta_eo(),
        group_rates,
    })
}

pub fn accuracy(scores: &[RiskScore], labels: &[u8], threshold: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty sample".into()));
    }
    check_lengths(scores.len(), labels.len(), labels.len())?;
    let mut correct = 0usize;
    for (&s, &y) in scores.iter().zip(labels) {
        correct += usize::from(predict(s, threshold)? == y);
    }
    Ok(correct as f64 / scores.len() as f64)
}

/// Inclusive uniform grid with exact endpoints.
pub fn threshold_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t_min) || !(0.0..=1.0).contains(&t_max) || t_min >= t_max {
        return Err(Error::InvalidArgument(format!(
            "threshold range must satisfy 0 <= t_min < t_max <= 1, got [{t_min}, {t_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("a sweep needs at least 2 steps, got {steps}")));
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| {
            if i == last {
                t_max
            } else {
                t_min + (t_max - t_min) * i as f64 / last as f64
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParitySweep {
    pub kind: ParityKind,
    pub thresholds: Vec<f64>,
    pub parity_values: Vec<f64>,
    pub accuracies: Vec<f64>,
    /// `max − min` of the parity values.
    pub interval: f64,
    /// Population standard deviation of the parity values.
    pub std: f64,
}

/// `(max − min, population std)`.
pub fn spread(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (max - min, var.sqrt())
}

/// Parity at every point of `threshold_grid(t_min, t_max, steps)`.
/// Group membership does not depend on the threshold, so an empty group
/// fails the whole sweep.
pub fn threshold_sweep(
    scores: &[RiskScore],
    labels: &[u8],
    protected: &[u8],
    t_min: f64,
    t_max: f64,
    steps: usize,
    kind: ParityKind,
) -> Result<ParitySweep> {
    let thresholds = threshold_grid(t_min, t_max, steps)?;
    let mut parity_values = Vec::with_capacity(steps);
    let mut accuracies = Vec::with_capacity(steps);
    for &t in &thresholds {
        let r = parity_report(scores, labels, protected, t)?;
        let value = match kind {
            ParityKind::Dp => r.delta_dp,
            ParityKind::Eo => r
                .delta_eo
                .ok_or_else(|| Error::EmptyGroup("an (A, Y) cell is empty".into()))?,
        };
        parity_values.push(value);
        accuracies.push(r.accuracy);
    }
    let (interval, std) = spread(&parity_values);
    Ok(ParitySweep {
        kind,
        thresholds,
        parity_values,
        accuracies,
        interval,
        std,
    })
}

/// CSV `threshold,parity,accuracy`.
pub fn write_sweep_csv<W: Write>(out: W, sweep: &ParitySweep) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "parity", "accuracy"])?;
    for ((t, p), a) in sweep.thresholds.iter().zip(&sweep.parity_values).zip(&sweep.accuracies) {
        w.write_record([t.to_string(), p.to_string(), a.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))?;
    Ok(())
}

/// Piecewise-constant density on a partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDensity {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl DiscreteDensity {
    /// `edges` must run strictly upward from 0 to 1 with one more entry
    /// than `mass`; `mass` must be non-negative and sum to 1.
    pub fn new(edges: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() || edges.len() != mass.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} edges cannot bound {} cells",
                edges.len(),
                mass.len()
            )));
        }
        if edges[0] != 0.0 || edges[edges.len() - 1] != 1.0 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("edges must increase strictly from 0 to 1".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidArgument("cell masses must be finite and non-negative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("cell masses sum to {total}, not 1")));
        }
        Ok(DiscreteDensity { edges, mass })
    }

    pub fn uniform_edges(n_cells: usize) -> Vec<f64> {
        (0..=n_cells)
            .map(|i| if i == n_cells { 1.0 } else { i as f64 / n_cells as f64 })
            .collect()
    }

    /// Normalized hard histogram of `scores` on `n_cells` equal cells,
    /// each cell `[lo, hi)` except the last, which includes 1.
    pub fn from_scores(scores: &[RiskScore], n_cells: usize) -> Result<Self> {
        if scores.is_empty() || n_cells == 0 {
            return Err(Error::InvalidArgument("histogram needs scores and at least one cell".into()));
        }
        let mut counts = vec![0usize; n_cells];
        for s in scores {
            let cell = ((s.value() * n_cells as f64) as usize).min(n_cells - 1);
            counts[cell] += 1;
        }
        let n = scores.len() as f64;
        let mass = counts.iter().map(|&c| c as f64 / n).collect();
        DiscreteDensity::new(Self::uniform_edges(n_cells), mass)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Density value (mass per unit length) of each cell.
    pub fn densities(&self) -> Vec<f64> {
        self.mass
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect()
    }

    /// Mass strictly above `t`, spreading each cell's mass uniformly.
    pub fn tail_mass(&self, t: f64) -> f64 {
        self.mass
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, w)| {
                let (lo, hi) = (w[0], w[1]);
                if t <= lo {
                    *m
                } else if t >= hi {
                    0.0
                } else {
                    m * (hi - t) / (hi - lo)
                }
            })
            .sum()
    }
}

/// `max |f₀ − f₁|` over the cells of a shared partition, in density units.
pub fn density_gap(d0: &DiscreteDensity, d1: &DiscreteDensity) -> Result<f64> {
    if d0.edges != d1.edges {
        return Err(Error::InvalidArgument("densities are defined on different partitions".into()));
    }
    Ok(d0
        .densities()
        .iter()
        .zip(d1.densities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// L1 distance between the cell masses of two densities on one partition.
pub fn l1_distance(d0: &DiscreteDensity, d1: &DiscreteDensity) -> Result<f64> {
    if d0.edges != d1.edges {
        return Err(Error::InvalidArgument("densities are defined on different partitions".into()));
    }
    Ok(d0.mass.iter().zip(&d1.mass).map(|(a, b)| (a - b).abs()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub kind: ParityKind,
    /// `[ε_DP]` or `[ε₀, ε₁]` for the `Y=0` and `Y=1` slices.
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub observed: Vec<f64>,
    pub bounds: Vec<f64>,
    /// `bound − observed` per threshold.
    pub slack: Vec<f64>,
}

impl BoundCheck {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn assemble(kind: ParityKind, epsilons: Vec<f64>, t_grid: &[f64], observed: Vec<f64>) -> Self {
        let eps = epsilons.iter().sum::<f64>() / epsilons.len() as f64;
        let bounds: Vec<f64> = t_grid.iter().map(|&t| eps * t.min(1.0 - t)).collect();
        let slack = bounds.iter().zip(&observed).map(|(b, o)| b - o).collect();
        BoundCheck {
            kind,
            epsilons,
            thresholds: t_grid.to_vec(),
            observed,
            bounds,
            slack,
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("thresholds must lie in [0, 1]".into()));
    }
    Ok(())
}

/// ΔDP(t) from exact tail masses against `ε_DP·min{t, 1−t}`.
pub fn bound_check_dp(d0: &DiscreteDensity, d1: &DiscreteDensity, t_grid: &[f64]) -> Result<BoundCheck> {
    check_grid(t_grid)?;
    let eps = density_gap(d0, d1)?;
    let observed = t_grid.iter().map(|&t| (d0.tail_mass(t) - d1.tail_mass(t)).abs()).collect();
    Ok(BoundCheck::assemble(ParityKind::Dp, vec![eps], t_grid, observed))
}

/// ΔEO(t) against `½(ε₀ + ε₁)·min{t, 1−t}`. `negatives` holds the two
/// groups' densities given `Y=0`, `positives` given `Y=1`.
pub fn bound_check_eo(
    negatives: (&DiscreteDensity, &DiscreteDensity),
    positives: (&DiscreteDensity, &DiscreteDensity),
    t_grid: &[f64],
) -> Result<BoundCheck> {
    check_grid(t_grid)?;
    let eps0 = density_gap(negatives.0, negatives.1)?;
    let eps1 = density_gap(positives.0, positives.1)?;
    if negatives.0.edges != positives.0.edges {
        return Err(Error::InvalidArgument("densities are defined on different partitions".into()));
    }
    let observed = t_grid
        .iter()
        .map(|&t| {
            0.5 * ((negatives.0.tail_mass(t) - negatives.1.tail_mass(t)).abs()
                + (positives.0.tail_mass(t) - positives.1.tail_mass(t)).abs())
        })
        .collect();
    Ok(BoundCheck::assemble(ParityKind::Eo, vec![eps0, eps1], t_grid, observed))
}
