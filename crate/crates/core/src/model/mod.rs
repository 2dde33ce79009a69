//! Scoring functions `g`, risk scores `s = σ(g)`, the RBF kernel and
//! thresholded prediction.

mod format;

pub use format::{read_model, write_model, ModelFile, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Threshold used when none is given.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// `g(x) = wᵀx + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), x.len())?;
        Ok(dot(&self.weights, x) + self.bias)
    }
}

/// `g(x) = Σᵢ αᵢ K(Xᵢ, x) + b` over every retained training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub support: Matrix,
    pub gamma: f64,
}

impl KernelModel {
    pub fn new(alpha: Vec<f64>, bias: f64, support: Matrix, gamma: f64) -> Result<Self> {
        check_dim(support.rows(), alpha.len())?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        Ok(KernelModel {
            alpha,
            bias,
            support,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.support.cols()
    }

    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.support.cols(), x.len())?;
        let sum: f64 = self
            .support
            .iter_rows()
            .zip(&self.alpha)
            .map(|(s, a)| a * rbf_unchecked(s, x, self.gamma))
            .sum();
        Ok(sum + self.bias)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Kernel(KernelModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.weights.len(),
            Model::Kernel(m) => m.dim(),
        }
    }

    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Linear(m) => m.raw_score(x),
            Model::Kernel(m) => m.raw_score(x),
        }
    }

    /// Raw scores for every row of `features`. Each row is scored
    /// independently, so the result does not depend on evaluation order.
    pub fn raw_scores(&self, features: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.dim(), features.cols())?;
        features.iter_rows().map(|x| self.raw_score(x)).collect()
    }

    pub fn risk_scores(&self, features: &Matrix) -> Result<Vec<RiskScore>> {
        self.raw_scores(features)?.into_iter().map(risk_score).collect()
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn rbf_unchecked(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// `exp(−γ‖a − b‖²)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(rbf_unchecked(a, b, gamma))
}

/// Symmetric Gram matrix `K(Xᵢ, Xⱼ)` under an arbitrary kernel.
pub fn gram_matrix_with<F>(features: &Matrix, kernel: F) -> Matrix
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let m = features.rows();
    let mut k = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = kernel(features.row(i), features.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

pub fn rbf_gram_matrix(features: &Matrix, gamma: f64) -> Result<Matrix> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(gram_matrix_with(features, |a, b| rbf_unchecked(a, b, gamma)))
}

/// A value in `[0, 1]` produced by the sigmoid of a raw score.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskScore(f64);

impl RiskScore {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidArgument(format!("risk score {value} outside [0, 1]")));
        }
        Ok(RiskScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Logistic sigmoid in the two-branch form that never overflows.
pub fn sigmoid(raw: f64) -> f64 {
    if raw >= 0.0 {
        1.0 / (1.0 + (-raw).exp())
    } else {
        let e = raw.exp();
        e / (1.0 + e)
    }
}

pub fn risk_score(raw: f64) -> Result<RiskScore> {
    if raw.is_nan() {
        return Err(Error::NonFinite("raw score is NaN".into()));
    }
    Ok(RiskScore(sigmoid(raw).clamp(0.0, 1.0)))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(())
}

/// 0 when `score ≤ threshold`, 1 otherwise; a tie goes to class 0.
pub fn predict(score: RiskScore, threshold: f64) -> Result<u8> {
    check_threshold(threshold)?;
    Ok(u8::from(score.0 > threshold))
}
