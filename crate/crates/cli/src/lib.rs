//! Command-line experiments: train, threshold sweeps, η tradeoff curves and
//! per-group risk distributions, all driven by one [`ExperimentConfig`].

pub mod config;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tifair::dataset::{load_csv, preprocess, split, Dataset, GroupPartition, PartitionMode};
use tifair::metrics::{
    l1_distance, parity_report, threshold_sweep, write_sweep_csv, DiscreteDensity, ParityKind, ParityReport,
    ParitySweep,
};
use tifair::model::{read_model, write_model, ModelFile};
use tifair::training::{train, write_loss_trace, TrainReport};
use tifair::{Error, Model, RiskScore};

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("incompatible model: {0}")]
    Incompatible(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 for usage and config problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tifair", version, about = "Threshold-invariant fair classification experiments")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config's split seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides any config key, e.g. `--set eta=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dp,
    Eo,
}

impl Kind {
    fn parity(self) -> ParityKind {
        match self {
            Kind::Dp => ParityKind::Dp,
            Kind::Eo => ParityKind::Eo,
        }
    }

    fn partition(self) -> PartitionMode {
        match self {
            Kind::Dp => PartitionMode::DemographicParity,
            Kind::Eo => PartitionMode::EqualizedOdds,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Dp => "dp",
            Kind::Eo => "eo",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on the training split; writes model.txt, loss_trace.csv and
    /// summary.json (test-split metrics).
    Train,
    /// Sweep the decision threshold on the test split; writes
    /// sweep_<kind>.csv and sweep_<kind>.json.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Dp)]
        kind: Kind,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Train one model per η; writes tradeoff.csv.
    Tradeoff {
        /// Comma-separated η values; defaults to the config's `etas`.
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
    },
    /// Per-group histograms of test-split risk scores; writes
    /// riskdist_<mode>.csv and riskdist_<mode>.json.
    Riskdist {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Dp)]
        mode: Kind,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
}

/// Train and test splits of the configured dataset.
pub struct Experiment {
    pub train: Dataset,
    pub test: Dataset,
}

pub fn load_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    let schema = cfg.schema()?;
    let raw = load_csv(&cfg.data, &schema, &cfg.row_filters()?)?;
    let ds = preprocess(&raw, &schema, None)?;
    let (train, test) = split(&ds, cfg.train_fraction, cfg.seed)?;
    Ok(Experiment { train, test })
}

pub fn test_scores(model: &Model, test: &Dataset) -> Result<Vec<RiskScore>> {
    Ok(model.risk_scores(test.features())?)
}

/// Trains on the training split and evaluates at the configured threshold
/// on the test split.
pub fn train_and_evaluate(cfg: &ExperimentConfig, exp: &Experiment) -> Result<(TrainReport, ParityReport)> {
    let report = train(&exp.train, &cfg.train_config())?;
    let scores = test_scores(&report.final_model, &exp.test)?;
    let parity = parity_report(&scores, exp.test.labels(), exp.test.protected(), cfg.threshold)?;
    Ok((report, parity))
}

pub fn sweep_model(
    model: &Model,
    test: &Dataset,
    kind: ParityKind,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<ParitySweep> {
    let scores = test_scores(model, test)?;
    Ok(threshold_sweep(&scores, test.labels(), test.protected(), t_min, t_max, steps, kind)?)
}

#[derive(Debug, Serialize)]
struct TrainSummary {
    accuracy: f64,
    delta_dp: f64,
    delta_eo: Option<f64>,
    threshold: f64,
    split: &'static str,
    n_train: usize,
    n_test: usize,
    iterations: usize,
    final_loss: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    kind: &'static str,
    accuracy: f64,
    delta_dp: f64,
    delta_eo: Option<f64>,
    threshold: f64,
    interval: f64,
    std: f64,
    t_min: f64,
    t_max: f64,
    steps: usize,
    split: &'static str,
}

#[derive(Debug, Serialize)]
struct GroupDistance {
    groups: String,
    l1: f64,
}

#[derive(Debug, Serialize)]
struct RiskdistSummary {
    mode: &'static str,
    bins: usize,
    split: &'static str,
    distances: Vec<GroupDistance>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Output {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        writeln!(w).map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn output_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir).map_err(|source| CliError::Output {
        path: cfg.out_dir.clone(),
        source,
    })?;
    Ok(cfg.out_dir.clone())
}

fn load_model_for(path: &Path, test: &Dataset) -> Result<(ModelFile, Dataset)> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open model {}: {e}", path.display())))?;
    let mf = read_model(BufReader::new(file))?;
    if mf.feature_names != test.feature_names() {
        return Err(CliError::Incompatible(format!(
            "model features {:?} differ from dataset features {:?}",
            mf.feature_names,
            test.feature_names()
        )));
    }
    let test = test.restandardize(&mf.stats)?;
    Ok((mf, test))
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<()> {
    let exp = load_experiment(cfg)?;
    let out = output_dir(cfg)?;
    let report = match train(&exp.train, &cfg.train_config()) {
        Ok(r) => r,
        Err(Error::Diverged { iteration, trace }) => {
            write_with(&out.join("loss_trace.csv"), |w| Ok(write_loss_trace(w, &trace)?))?;
            return Err(Error::Diverged { iteration, trace }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_with(&out.join("loss_trace.csv"), |w| Ok(write_loss_trace(w, &report.loss_trace)?))?;
    let mf = ModelFile {
        model: report.final_model.clone(),
        feature_names: exp.train.feature_names().to_vec(),
        stats: exp.train.stats().clone(),
    };
    write_with(&out.join("model.txt"), |w| Ok(write_model(w, &mf)?))?;
    let scores = test_scores(&report.final_model, &exp.test)?;
    let parity = parity_report(&scores, exp.test.labels(), exp.test.protected(), cfg.threshold)?;
    write_json(
        &out.join("summary.json"),
        &TrainSummary {
            accuracy: parity.accuracy,
            delta_dp: parity.delta_dp,
            delta_eo: parity.delta_eo,
            threshold: cfg.threshold,
            split: "test",
            n_train: exp.train.len(),
            n_test: exp.test.len(),
            iterations: report.iterations_run,
            final_loss: report.loss_trace.last().map(|r| r.total),
        },
    )
}

fn cmd_sweep(
    cfg: &ExperimentConfig,
    model: &Path,
    kind: Kind,
    t_min: Option<f64>,
    t_max: Option<f64>,
    steps: Option<usize>,
) -> Result<()> {
    let t_min = t_min.unwrap_or(cfg.sweep_t_min);
    let t_max = t_max.unwrap_or(cfg.sweep_t_max);
    let steps = steps.unwrap_or(cfg.sweep_steps);
    tifair::metrics::threshold_grid(t_min, t_max, steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let exp = load_experiment(cfg)?;
    let (mf, test) = load_model_for(model, &exp.test)?;
    let sweep = sweep_model(&mf.model, &test, kind.parity(), t_min, t_max, steps)?;
    let scores = test_scores(&mf.model, &test)?;
    let at = parity_report(&scores, test.labels(), test.protected(), cfg.threshold)?;
    let out = output_dir(cfg)?;
    write_with(&out.join(format!("sweep_{}.csv", kind.name())), |w| Ok(write_sweep_csv(w, &sweep)?))?;
    write_json(
        &out.join(format!("sweep_{}.json", kind.name())),
        &SweepSummary {
            kind: kind.name(),
            accuracy: at.accuracy,
            delta_dp: at.delta_dp,
            delta_eo: at.delta_eo,
            threshold: cfg.threshold,
            interval: sweep.interval,
            std: sweep.std,
            t_min,
            t_max,
            steps,
            split: "test",
        },
    )
}

fn cmd_tradeoff(cfg: &ExperimentConfig, etas: Option<&[f64]>) -> Result<()> {
    let mut etas = etas.unwrap_or(&cfg.etas).to_vec();
    if etas.is_empty() {
        return Err(CliError::Usage("the η list is empty".into()));
    }
    if etas.iter().any(|e| !e.is_finite()) {
        return Err(CliError::Usage("η values must be finite".into()));
    }
    etas.sort_by(f64::total_cmp);
    let exp = load_experiment(cfg)?;
    let out = output_dir(cfg)?;
    let path = out.join("tradeoff.csv");
    let mut rows = vec!["eta,status,accuracy,delta_dp,delta_eo,iterations".to_string()];
    for eta in etas {
        let run = ExperimentConfig { eta, ..cfg.clone() };
        match train_and_evaluate(&run, &exp) {
            Ok((report, parity)) => rows.push(format!(
                "{eta},ok,{},{},{},{}",
                parity.accuracy,
                parity.delta_dp,
                parity.delta_eo.map(|v| v.to_string()).unwrap_or_default(),
                report.iterations_run
            )),
            Err(e) => {
                eprintln!("eta={eta}: {e}");
                let status = match e {
                    CliError::Core(Error::Diverged { .. }) => "diverged",
                    _ => "failed",
                };
                rows.push(format!("{eta},{status},,,,"));
            }
        }
    }
    write_with(&path, |w| {
        for r in &rows {
            writeln!(w, "{r}").map_err(|source| CliError::Output {
                path: path.clone(),
                source,
            })?;
        }
        Ok(())
    })
}

fn cmd_riskdist(cfg: &ExperimentConfig, model: &Path, mode: Kind, bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let exp = load_experiment(cfg)?;
    let (mf, test) = load_model_for(model, &exp.test)?;
    let scores = test_scores(&mf.model, &test)?;
    let partition = GroupPartition::from_attributes(test.protected(), test.labels(), mode.partition())?;
    let mut hists = Vec::new();
    for g in partition.groups() {
        let s: Vec<RiskScore> = g.indices.iter().map(|&i| scores[i]).collect();
        hists.push((g.key, DiscreteDensity::from_scores(&s, bins)?));
    }
    let mut distances = Vec::new();
    for (a, b) in partition.pairs() {
        let find = |k| &hists.iter().find(|(key, _)| *key == k).expect("partition group").1;
        distances.push(GroupDistance {
            groups: format!("{} vs {}", a.key, b.key),
            l1: l1_distance(find(a.key), find(b.key))?,
        });
    }
    let out = output_dir(cfg)?;
    let csv_path = out.join(format!("riskdist_{}.csv", mode.name()));
    write_with(&csv_path, |w| {
        let io_err = |source| CliError::Output {
            path: csv_path.clone(),
            source,
        };
        writeln!(w, "group,bin_center,mass").map_err(io_err)?;
        for (key, d) in &hists {
            for (edge, m) in d.edges().windows(2).zip(d.mass()) {
                writeln!(w, "\"{key}\",{},{m}", 0.5 * (edge[0] + edge[1])).map_err(io_err)?;
            }
        }
        Ok(())
    })?;
    write_json(
        &out.join(format!("riskdist_{}.json", mode.name())),
        &RiskdistSummary {
            mode: mode.name(),
            bins,
            split: "test",
            distances,
        },
    )
}

pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path, &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Train => cmd_train(&cfg),
        Command::Sweep {
            model,
            kind,
            t_min,
            t_max,
            steps,
        } => cmd_sweep(&cfg, model, *kind, *t_min, *t_max, *steps),
        Command::Tradeoff { etas } => cmd_tradeoff(&cfg, etas.as_deref()),
        Command::Riskdist { model, mode, bins } => cmd_riskdist(&cfg, model, *mode, *bins),
    }
}
