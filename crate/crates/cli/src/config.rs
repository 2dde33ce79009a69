//! Experiment configuration: a flat TOML file whose every key can be
//! overridden from the command line with `--set key=value`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tifair::dataset::{FeatureSpec, RowFilter, Schema};
use tifair::fairness::{HistogramParams, DEFAULT_BINS, DEFAULT_HISTOGRAM_FLOOR};
use tifair::training::{FairnessMode, ModelKind, TrainConfig};
use tifair::Method;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// CSV path; relative paths are resolved against the config file.
    pub data: PathBuf,
    /// `name:continuous` or `name:binary[:positive]`.
    pub features: Vec<String>,
    /// `name[:positive]`.
    pub protected: String,
    /// `name[:positive]`.
    pub label: String,
    /// Row filters such as `is_recid != -1`.
    pub filters: Vec<String>,
    pub train_fraction: f64,
    pub seed: u64,

    pub model: ModelKind,
    pub fairness: FairnessMode,
    pub method: Method,
    pub eta: f64,
    /// SVM penalty; omitted means `1 / (10·|train|)`.
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub max_iters: usize,
    pub n_bins: usize,
    /// Kernel width of the soft histogram; omitted means half a bin.
    pub sigma_c: Option<f64>,

    pub threshold: f64,
    pub sweep_t_min: f64,
    pub sweep_t_max: f64,
    pub sweep_steps: usize,
    /// η values for `tradeoff`.
    pub etas: Vec<f64>,

    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        ExperimentConfig {
            data: PathBuf::new(),
            features: Vec::new(),
            protected: String::new(),
            label: String::new(),
            filters: Vec::new(),
            train_fraction: 0.7,
            seed: tifair::dataset::DEFAULT_SPLIT_SEED,
            model: train.model_kind,
            fairness: train.fairness_mode,
            method: train.method,
            eta: train.eta,
            lambda: train.lambda,
            gamma: train.gamma,
            lr_start: train.lr_start,
            lr_end: train.lr_end,
            momentum: train.momentum,
            max_iters: train.max_iters,
            n_bins: DEFAULT_BINS,
            sigma_c: None,
            threshold: tifair::model::DEFAULT_THRESHOLD,
            sweep_t_min: tifair::metrics::DEFAULT_SWEEP_MIN,
            sweep_t_max: tifair::metrics::DEFAULT_SWEEP_MAX,
            sweep_steps: tifair::metrics::DEFAULT_SWEEP_STEPS,
            etas: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            out_dir: PathBuf::from("out"),
        }
    }
}

fn split_positive(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((name, pos)) => (name, Some(pos)),
        None => (s, None),
    }
}

impl ExperimentConfig {
    /// Reads `path` and applies `key=value` overrides. Values are parsed as
    /// TOML and fall back to plain strings.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text, overrides)?;
        if cfg.data.is_relative() && !cfg.data.as_os_str().is_empty() {
            if let Some(dir) = path.parent() {
                cfg.data = dir.join(&cfg.data);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = format!("v = {value}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            table.insert(key.to_string(), parsed);
        }
        // Round-trip through text so type errors point at the offending line.
        let merged = toml::to_string(&table).map_err(|e| CliError::Config(format!("{e}")))?;
        let cfg: ExperimentConfig = toml::from_str(&merged).map_err(|e| CliError::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("`{key}`: {msg}")));
        if self.data.as_os_str().is_empty() {
            return bad("data", "missing dataset path".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction", format!("{} is not in (0, 1)", self.train_fraction));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold", format!("{} is not in [0, 1]", self.threshold));
        }
        if self.n_bins == 0 {
            return bad("n_bins", "must be positive".into());
        }
        if let Some(s) = self.sigma_c {
            if !(s > 0.0) {
                return bad("sigma_c", format!("{s} is not positive"));
            }
        }
        self.schema()?;
        self.row_filters()?;
        self.train_config()
            .validate()
            .or_else(|e| bad("training", e.to_string()))?;
        Ok(())
    }

    pub fn schema(&self) -> Result<Schema, CliError> {
        let config_err = |key: &str, e: tifair::Error| CliError::Config(format!("`{key}`: {e}"));
        let mut specs = self
            .features
            .iter()
            .map(|f| FeatureSpec::parse_feature(f))
            .collect::<tifair::Result<Vec<_>>>()
            .map_err(|e| config_err("features", e))?;
        let (name, pos) = split_positive(&self.protected);
        specs.push(FeatureSpec::protected(name, pos));
        let (name, pos) = split_positive(&self.label);
        specs.push(FeatureSpec::label(name, pos));
        Schema::new(specs).map_err(|e| config_err("features", e))
    }

    pub fn row_filters(&self) -> Result<Vec<RowFilter>, CliError> {
        self.filters
            .iter()
            .map(|f| f.parse())
            .collect::<tifair::Result<Vec<_>>>()
            .map_err(|e| CliError::Config(format!("`filters`: {e}")))
    }

    pub fn histogram(&self) -> HistogramParams {
        let base = HistogramParams::with_bins(self.n_bins);
        HistogramParams {
            sigma_c: self.sigma_c.unwrap_or(base.sigma_c),
            floor: DEFAULT_HISTOGRAM_FLOOR,
            ..base
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            model_kind: self.model,
            fairness_mode: self.fairness,
            method: self.method,
            eta: self.eta,
            lambda: self.lambda,
            gamma: self.gamma,
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            momentum: self.momentum,
            max_iters: self.max_iters,
            histogram: self.histogram(),
        }
    }
}
