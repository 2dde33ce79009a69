//! Fairness-regularized losses for logistic regression, linear SVM and
//! kernel SVM, minimized by full-batch (sub)gradient descent with momentum.
//!
//! Every loss is `data term + η·E_f`, where `E_f` is the regularizer from
//! [`crate::fairness`] evaluated on the training raw scores. The SVM data
//! terms include the `λ/2` quadratic penalty; the bias is never penalized.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{partition_groups, Dataset, GroupPartition, PartitionMode};
use crate::error::{Error, Result};
use crate::fairness::{regularizer, HistogramParams, Method};
use crate::matrix::{dot, Matrix};
use crate::model::{rbf_gram_matrix, sigmoid, KernelModel, LinearModel, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Logistic regression.
    Lr,
    /// Linear SVM on the hinge loss.
    Lsvm,
    /// RBF-kernel SVM parameterized by one coefficient per training sample.
    Ksvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FairnessMode {
    None,
    Dp,
    Eo,
}

impl FairnessMode {
    pub fn partition_mode(self) -> Option<PartitionMode> {
        match self {
            FairnessMode::None => None,
            FairnessMode::Dp => Some(PartitionMode::DemographicParity),
            FairnessMode::Eo => Some(PartitionMode::EqualizedOdds),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub fairness_mode: FairnessMode,
    pub method: Method,
    /// Weight η of the fairness regularizer.
    pub eta: f64,
    /// SVM penalty λ; `None` means `1 / (10·|D|)`.
    pub lambda: Option<f64>,
    /// RBF width γ (kernel SVM only).
    pub gamma: f64,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub max_iters: usize,
    pub histogram: HistogramParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model_kind: ModelKind::Lr,
            fairness_mode: FairnessMode::None,
            method: Method::Gaussian,
            eta: 0.0,
            lambda: None,
            gamma: 0.5,
            lr_start: 0.1,
            lr_end: 1e-4,
            momentum: 0.9,
            max_iters: 2000,
            histogram: HistogramParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be a non-negative number, got {}", self.eta));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("lambda must be non-negative, got {l}"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end && self.lr_start.is_finite()) {
            return bad(format!(
                "learning rates must satisfy lr_start >= lr_end > 0, got {} and {}",
                self.lr_start, self.lr_end
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }

    /// Geometric decay from `lr_start` at the first iteration to `lr_end`
    /// at the last.
    pub fn learning_rate(&self, iteration: usize) -> f64 {
        if self.max_iters <= 1 {
            return self.lr_start;
        }
        let frac = iteration as f64 / (self.max_iters - 1) as f64;
        self.lr_start * (self.lr_end / self.lr_start).powf(frac)
    }

    pub fn lambda_for(&self, n_samples: usize) -> f64 {
        self.lambda.unwrap_or(1.0 / (10.0 * n_samples as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub iteration: usize,
    pub total: f64,
    /// Loss without the fairness term.
    pub data: f64,
    /// Unweighted regularizer `E_f` (0 when fairness is off).
    pub fairness: f64,
}

/// A loss value with its (sub)gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub total: f64,
    pub data: f64,
    pub fairness: f64,
    /// With respect to `w` (linear) or `α` (kernel).
    pub grad: Vec<f64>,
    pub grad_bias: f64,
}

/// Data term and its derivative with respect to each raw score.
struct DataTerm {
    value: f64,
    per_sample: Vec<f64>,
}

fn cross_entropy(raw: &[f64], labels: &[u8]) -> DataTerm {
    let m = raw.len() as f64;
    let mut value = 0.0;
    let per_sample = raw
        .iter()
        .zip(labels)
        .map(|(&g, &y)| {
            let y = f64::from(y);
            // softplus(g) − y·g
            value += g.max(0.0) + (-g.abs()).exp().ln_1p() - y * g;
            (sigmoid(g) - y) / m
        })
        .collect();
    DataTerm {
        value: value / m,
        per_sample,
    }
}

fn hinge(raw: &[f64], labels: &[u8]) -> DataTerm {
    let m = raw.len() as f64;
    let mut value = 0.0;
    let per_sample = raw
        .iter()
        .zip(labels)
        .map(|(&g, &y)| {
            let y = if y == 1 { 1.0 } else { -1.0 };
            let margin = 1.0 - y * g;
            if margin > 0.0 {
                value += margin;
                -y / m
            } else {
                0.0
            }
        })
        .collect();
    DataTerm {
        value: value / m,
        per_sample,
    }
}

/// Adds `η·E_f` to `coef` (per-sample `∂/∂g`) and returns the unweighted `E_f`.
fn add_fairness(
    raw: &[f64],
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
    coef: &mut [f64],
) -> Result<f64> {
    let (Some(mode), Some(partition)) = (cfg.fairness_mode.partition_mode(), partition) else {
        if cfg.fairness_mode != FairnessMode::None {
            return Err(Error::InvalidArgument("fairness mode requires a group partition".into()));
        }
        return Ok(0.0);
    };
    if partition.mode() != mode {
        return Err(Error::InvalidArgument(format!(
            "partition is {:?}, config asks for {:?}",
            partition.mode(),
            mode
        )));
    }
    let reg = regularizer(raw, partition, cfg.method, &cfg.histogram)?;
    if cfg.eta > 0.0 {
        for (c, d) in coef.iter_mut().zip(&reg.gradient) {
            *c += cfg.eta * d;
        }
    }
    Ok(reg.value)
}

fn fairness_total(data: f64, fairness: f64, eta: f64) -> f64 {
    if eta > 0.0 {
        data + eta * fairness
    } else {
        data
    }
}

fn check_finite(total: f64) -> Result<()> {
    if !total.is_finite() {
        return Err(Error::NonFinite(format!("loss is {total}")));
    }
    Ok(())
}

fn check_rows(ds: &Dataset, partition: Option<&GroupPartition>) -> Result<()> {
    if let Some(p) = partition {
        if p.len() != ds.len() {
            return Err(Error::DimensionMismatch {
                expected: ds.len(),
                actual: p.len(),
            });
        }
    }
    Ok(())
}

fn linear_eval(
    model: &LinearModel,
    ds: &Dataset,
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
    data_term: fn(&[f64], &[u8]) -> DataTerm,
    lambda: f64,
) -> Result<LossEval> {
    check_rows(ds, partition)?;
    let raw: Vec<f64> = ds
        .features()
        .iter_rows()
        .map(|x| model.raw_score(x))
        .collect::<Result<_>>()?;
    let DataTerm { value, mut per_sample } = data_term(&raw, ds.labels());
    let fairness = add_fairness(&raw, partition, cfg, &mut per_sample)?;
    let penalty = 0.5 * lambda * dot(&model.weights, &model.weights);
    let data = value + penalty;
    let total = fairness_total(data, fairness, cfg.eta);
    check_finite(total)?;

    let mut grad = ds.features().mul_vec_transposed(&per_sample)?;
    if lambda > 0.0 {
        for (g, w) in grad.iter_mut().zip(&model.weights) {
            *g += lambda * w;
        }
    }
    Ok(LossEval {
        total,
        data,
        fairness,
        grad,
        grad_bias: per_sample.iter().sum(),
    })
}

/// `(1/|D|)·Σ L_ce(s(X), Y) + η·E_f(D)`.
pub fn loss_lr(
    model: &LinearModel,
    ds: &Dataset,
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
) -> Result<LossEval> {
    linear_eval(model, ds, partition, cfg, cross_entropy, 0.0)
}

/// `(λ/2)‖w‖² + η·E_f(D) + (1/|D|)·Σ max{0, 1 − Y·g(X)}` with `Y ∈ {−1, +1}`.
/// The hinge subgradient at the kink is 0.
pub fn loss_lsvm(
    model: &LinearModel,
    ds: &Dataset,
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
) -> Result<LossEval> {
    linear_eval(model, ds, partition, cfg, hinge, cfg.lambda_for(ds.len()))
}

/// Kernel SVM loss in the coefficients `α` of `g(x) = Σ αᵢ K(Xᵢ, x) + b`:
/// `(λ/2)·αᵀKα + η·E_f + mean hinge`, with scores taken from the
/// precomputed Gram matrix of the training samples.
pub fn loss_ksvm(
    model: &KernelModel,
    ds: &Dataset,
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
    gram: &Matrix,
) -> Result<LossEval> {
    kernel_eval(&model.alpha, model.bias, ds, partition, cfg, gram)
}

fn kernel_eval(
    alpha: &[f64],
    bias: f64,
    ds: &Dataset,
    partition: Option<&GroupPartition>,
    cfg: &TrainConfig,
    gram: &Matrix,
) -> Result<LossEval> {
    let m = ds.len();
    if gram.rows() != m || gram.cols() != m {
        return Err(Error::InvalidArgument(format!(
            "Gram matrix is {}x{}, expected {m}x{m}",
            gram.rows(),
            gram.cols()
        )));
    }
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: alpha.len(),
        });
    }
    check_rows(ds, partition)?;
    let lambda = cfg.lambda_for(m);
    let k_alpha = gram.mul_vec(alpha)?;
    let raw: Vec<f64> = k_alpha.iter().map(|v| v + bias).collect();
    let DataTerm { value, mut per_sample } = hinge(&raw, ds.labels());
    let fairness = add_fairness(&raw, partition, cfg, &mut per_sample)?;
    let data = value + 0.5 * lambda * dot(alpha, &k_alpha);
    let total = fairness_total(data, fairness, cfg.eta);
    check_finite(total)?;

    // K is symmetric, so Kᵀc = Kc.
    let mut grad = gram.mul_vec(&per_sample)?;
    if lambda > 0.0 {
        for (g, ka) in grad.iter_mut().zip(&k_alpha) {
            *g += lambda * ka;
        }
    }
    Ok(LossEval {
        total,
        data,
        fairness,
        grad,
        grad_bias: per_sample.iter().sum(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub loss_trace: Vec<LossRecord>,
    pub final_model: Model,
    pub iterations_run: usize,
}

/// Heavy-ball descent: `v ← μv − lr_k·∇`, `θ ← θ + v`, from `θ = 0`.
/// `θ` is `[weights…, bias]`.
fn descend<F>(cfg: &TrainConfig, n_weights: usize, mut eval: F) -> Result<(Vec<f64>, f64, Vec<LossRecord>)>
where
    F: FnMut(&[f64], f64) -> Result<LossEval>,
{
    let mut weights = vec![0.0; n_weights];
    let mut bias = 0.0;
    let mut velocity = vec![0.0; n_weights];
    let mut velocity_bias = 0.0;
    let mut trace = Vec::with_capacity(cfg.max_iters);
    for k in 0..cfg.max_iters {
        let loss = match eval(&weights, bias) {
            Ok(l) => l,
            Err(Error::NonFinite(_)) => return Err(Error::Diverged { iteration: k, trace }),
            Err(e) => return Err(e),
        };
        trace.push(LossRecord {
            iteration: k,
            total: loss.total,
            data: loss.data,
            fairness: loss.fairness,
        });
        let lr = cfg.learning_rate(k);
        for ((w, v), g) in weights.iter_mut().zip(velocity.iter_mut()).zip(&loss.grad) {
            *v = cfg.momentum * *v - lr * g;
            *w += *v;
        }
        velocity_bias = cfg.momentum * velocity_bias - lr * loss.grad_bias;
        bias += velocity_bias;
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { iteration: k, trace });
        }
    }
    Ok((weights, bias, trace))
}

fn training_partition(ds: &Dataset, cfg: &TrainConfig) -> Result<Option<GroupPartition>> {
    let Some(mode) = cfg.fairness_mode.partition_mode() else {
        return Ok(None);
    };
    let p = partition_groups(ds, mode)?;
    for g in p.groups() {
        if g.indices.len() < 2 {
            return Err(Error::GroupTooSmall {
                group: g.key.to_string(),
                size: g.indices.len(),
                required: 2,
            });
        }
    }
    Ok(Some(p))
}

/// Trains the model described by `cfg` on `ds`. Deterministic: parameters
/// start at zero and every reduction runs in a fixed order.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    match cfg.model_kind {
        ModelKind::Lr | ModelKind::Lsvm => {
            let partition = training_partition(ds, cfg)?;
            let loss = if cfg.model_kind == ModelKind::Lr { loss_lr } else { loss_lsvm };
            let (weights, bias, trace) = descend(cfg, ds.dim(), |w, b| {
                let model = LinearModel {
                    weights: w.to_vec(),
                    bias: b,
                };
                loss(&model, ds, partition.as_ref(), cfg)
            })?;
            Ok(TrainReport {
                iterations_run: trace.len(),
                loss_trace: trace,
                final_model: Model::Linear(LinearModel { weights, bias }),
            })
        }
        ModelKind::Ksvm => {
            let gram = rbf_gram_matrix(ds.features(), cfg.gamma)?;
            train_kernel_with_gram(ds, cfg, &gram)
        }
    }
}

/// Kernel SVM training against a caller-supplied Gram matrix. The returned
/// model scores new points with the RBF kernel of width `cfg.gamma`, so a
/// different kernel here only makes sense for inspecting `α` and `b`.
pub fn train_kernel_with_gram(ds: &Dataset, cfg: &TrainConfig, gram: &Matrix) -> Result<TrainReport> {
    cfg.validate()?;
    let partition = training_partition(ds, cfg)?;
    let (alpha, bias, trace) = descend(cfg, ds.len(), |a, b| {
        kernel_eval(a, b, ds, partition.as_ref(), cfg, gram)
    })?;
    Ok(TrainReport {
        iterations_run: trace.len(),
        loss_trace: trace,
        final_model: Model::Kernel(KernelModel::new(alpha, bias, ds.features().clone(), cfg.gamma)?),
    })
}

/// CSV `iter,total,data,fairness`.
pub fn write_loss_trace<W: Write>(out: W, trace: &[LossRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "total", "data", "fairness"])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            r.total.to_string(),
            r.data.to_string(),
            r.fairness.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<loss trace>", e))?;
    Ok(())
}
