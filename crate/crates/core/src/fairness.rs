//! Risk-distribution equalizers.
//!
//! Two differentiable distances between the score distributions of two
//! groups:
//!
//! * **Histogram approximation** on risk scores `s = σ(g)`: each score votes
//!   into every bin with Gaussian weight `exp(−(s − c)²/2σ_c²)`, the counts
//!   are floored and normalized, and the groups are compared with the
//!   symmetric KL divergence `Σ (p − q)(ln p − ln q)`.
//! * **Gaussian assumption** on raw scores `g`: each group is summarized by
//!   its maximum-likelihood mean and variance and the groups are compared
//!   with the closed-form symmetric KL between the two normals.
//!
//! Gradients are exact and taken with respect to the raw score of every
//! sample, so trainers only need `∂g/∂θ` to backpropagate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{Group, GroupKey, GroupPartition, PartitionMode};
use crate::error::{Error, Result};
use crate::model::{sigmoid, RiskScore};

/// Floor applied to every unnormalized histogram count.
pub const DEFAULT_HISTOGRAM_FLOOR: f64 = 1e-8;
/// Lower bound on the per-group variance of raw scores.
pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Soft histogram of risk scores.
    #[serde(rename = "ha")]
    Histogram,
    /// Gaussian fit of raw scores.
    #[serde(rename = "ga")]
    Gaussian,
}

/// Binning for the soft histogram: `n_bins` equal bins on `[0, 1]` with
/// centers `(j − ½)/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramParams {
    pub n_bins: usize,
    pub sigma_c: f64,
    pub floor: f64,
}

impl Default for HistogramParams {
    fn default() -> Self {
        Self::with_bins(DEFAULT_BINS)
    }
}

impl HistogramParams {
    /// `n_bins` bins with kernel width half a bin.
    pub fn with_bins(n_bins: usize) -> Self {
        HistogramParams {
            n_bins,
            sigma_c: 0.5 / n_bins as f64,
            floor: DEFAULT_HISTOGRAM_FLOOR,
        }
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.n_bins as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let n = self.n_bins as f64;
        (0..self.n_bins).map(|j| (j as f64 + 0.5) / n).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 bins, got {}", self.n_bins)));
        }
        if !(self.sigma_c > 0.0 && self.sigma_c.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma_c must be positive, got {}", self.sigma_c)));
        }
        if !(self.floor >= 0.0 && self.floor.is_finite()) {
            return Err(Error::InvalidArgument(format!("floor must be non-negative, got {}", self.floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftHistogram {
    pub centers: Vec<f64>,
    pub bin_width: f64,
    pub sigma_c: f64,
    /// Gaussian-weighted counts before flooring.
    pub counts: Vec<f64>,
    /// Floored counts normalized to sum to one.
    pub mass: Vec<f64>,
}

fn kernel_weight(s: f64, c: f64, sigma_c: f64) -> f64 {
    let d = s - c;
    (-(d * d) / (2.0 * sigma_c * sigma_c)).exp()
}

fn soft_histogram_values(scores: &[f64], params: &HistogramParams) -> Result<SoftHistogram> {
    params.validate()?;
    if scores.is_empty() {
        return Err(Error::InvalidArgument("empty score set".into()));
    }
    let centers = params.centers();
    let mut counts = vec![0.0; centers.len()];
    for &s in scores {
        for (n, &c) in counts.iter_mut().zip(&centers) {
            *n += kernel_weight(s, c, params.sigma_c);
        }
    }
    let total: f64 = counts.iter().map(|n| n + params.floor).sum();
    let mass = counts.iter().map(|n| (n + params.floor) / total).collect();
    Ok(SoftHistogram {
        centers,
        bin_width: params.bin_width(),
        sigma_c: params.sigma_c,
        counts,
        mass,
    })
}

pub fn soft_histogram(scores: &[RiskScore], params: &HistogramParams) -> Result<SoftHistogram> {
    let values: Vec<f64> = scores.iter().map(|s| s.value()).collect();
    soft_histogram_values(&values, params)
}

/// `Σᵢ (pᵢ − qᵢ)(ln pᵢ − ln qᵢ)`, i.e. `KL(p‖q) + KL(q‖p)`.
pub fn kl_symmetric_hist(h0: &SoftHistogram, h1: &SoftHistogram) -> Result<f64> {
    if h0.centers != h1.centers {
        return Err(Error::InvalidArgument("histograms use different bins".into()));
    }
    Ok(symmetric_kl(&h0.mass, &h1.mass))
}

fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| if a == b { 0.0 } else { (a - b) * (a.ln() - b.ln()) })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub mu: f64,
    /// Maximum-likelihood variance, floored at [`VARIANCE_FLOOR`].
    pub var: f64,
    pub count: usize,
}

/// Mean and raw (unfloored) 1/n variance.
fn raw_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|g| (g - mu) * (g - mu)).sum::<f64>() / n;
    (mu, var)
}

pub fn gaussian_moments(raw_scores: &[f64]) -> Result<GaussianMoments> {
    if raw_scores.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 scores for moments, got {}",
            raw_scores.len()
        )));
    }
    let (mu, var) = raw_moments(raw_scores);
    if !mu.is_finite() || !var.is_finite() {
        return Err(Error::NonFinite("raw score moments".into()));
    }
    Ok(GaussianMoments {
        mu,
        var: var.max(VARIANCE_FLOOR),
        count: raw_scores.len(),
    })
}

/// `KL(N₀‖N₁) + KL(N₁‖N₀) = ½[((μ₀−μ₁)² + σ₀²)/σ₁² + ((μ₁−μ₀)² + σ₁²)/σ₀² − 2]`.
pub fn kl_symmetric_gauss(m0: &GaussianMoments, m1: &GaussianMoments) -> Result<f64> {
    for m in [m0, m1] {
        if !m.mu.is_finite() || !m.var.is_finite() {
            return Err(Error::NonFinite("gaussian moments".into()));
        }
        if !(m.var >= VARIANCE_FLOOR) {
            return Err(Error::InvalidArgument(format!("variance {} below floor", m.var)));
        }
    }
    Ok(gauss_distance(m0.mu, m0.var, m1.mu, m1.var))
}

fn gauss_distance(mu0: f64, v0: f64, mu1: f64, v1: f64) -> f64 {
    let d2 = (mu0 - mu1) * (mu0 - mu1);
    // Rounding can dip just below zero when the moments nearly agree.
    (0.5 * ((d2 + v0) / v1 + (d2 + v1) / v0 - 2.0)).max(0.0)
}

/// Distance between two groups and its gradient with respect to each
/// group's raw scores.
struct PairGradient {
    value: f64,
    grad0: Vec<f64>,
    grad1: Vec<f64>,
}

fn gaussian_pair(raw0: &[f64], raw1: &[f64]) -> PairGradient {
    let (mu0, var0) = raw_moments(raw0);
    let (mu1, var1) = raw_moments(raw1);
    let v0 = var0.max(VARIANCE_FLOOR);
    let v1 = var1.max(VARIANCE_FLOOR);
    let value = gauss_distance(mu0, v0, mu1, v1);

    let delta = mu0 - mu1;
    let d2 = delta * delta;
    let d_mu0 = delta * (1.0 / v0 + 1.0 / v1);
    let d_v0 = 0.5 * (1.0 / v1 - (d2 + v1) / (v0 * v0));
    let d_v1 = 0.5 * (1.0 / v0 - (d2 + v0) / (v1 * v1));

    let group_grad = |raw: &[f64], mu: f64, var: f64, d_mu: f64, d_v: f64| -> Vec<f64> {
        let n = raw.len() as f64;
        // A floored variance is constant in the scores.
        let d_v = if var > VARIANCE_FLOOR { d_v } else { 0.0 };
        raw.iter()
            .map(|g| d_mu / n + d_v * 2.0 * (g - mu) / n)
            .collect()
    };
    PairGradient {
        value,
        grad0: group_grad(raw0, mu0, var0, d_mu0, d_v0),
        grad1: group_grad(raw1, mu1, var1, -d_mu0, d_v1),
    }
}

fn histogram_pair(raw0: &[f64], raw1: &[f64], params: &HistogramParams) -> Result<PairGradient> {
    let s0: Vec<f64> = raw0.iter().map(|&g| sigmoid(g)).collect();
    let s1: Vec<f64> = raw1.iter().map(|&g| sigmoid(g)).collect();
    let h0 = soft_histogram_values(&s0, params)?;
    let h1 = soft_histogram_values(&s1, params)?;
    let value = symmetric_kl(&h0.mass, &h1.mass);

    // ∂d/∂p and ∂d/∂q for d = Σ (p − q)(ln p − ln q).
    let (dp, dq): (Vec<f64>, Vec<f64>) = h0
        .mass
        .iter()
        .zip(&h1.mass)
        .map(|(&p, &q)| {
            let log_ratio = p.ln() - q.ln();
            (log_ratio + 1.0 - q / p, -log_ratio + 1.0 - p / q)
        })
        .unzip();

    let grad = |scores: &[f64], hist: &SoftHistogram, d_mass: &[f64]| -> Vec<f64> {
        // Back through normalization h = u / Σu onto the unnormalized counts.
        let total: f64 = hist.counts.iter().map(|n| n + params.floor).sum();
        let weighted: f64 = d_mass.iter().zip(&hist.mass).map(|(d, h)| d * h).sum();
        let d_counts: Vec<f64> = d_mass.iter().map(|d| (d - weighted) / total).collect();
        let inv_var = 1.0 / (params.sigma_c * params.sigma_c);
        scores
            .iter()
            .map(|&s| {
                let d_s: f64 = hist
                    .centers
                    .iter()
                    .zip(&d_counts)
                    .map(|(&c, &dc)| dc * kernel_weight(s, c, params.sigma_c) * (-(s - c) * inv_var))
                    .sum();
                d_s * s * (1.0 - s)
            })
            .collect()
    };
    Ok(PairGradient {
        value,
        grad0: grad(&s0, &h0, &dp),
        grad1: grad(&s1, &h1, &dq),
    })
}

/// Value of a fairness regularizer with its gradient per raw score.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerValue {
    pub value: f64,
    /// `∂value/∂gᵢ`, indexed like the raw scores passed in.
    pub gradient: Vec<f64>,
}

fn gather(raw: &[f64], group: &Group) -> Vec<f64> {
    group.indices.iter().map(|&i| raw[i]).collect()
}

/// Sum of pairwise distances over the partition's group pairs.
pub fn regularizer(
    raw_scores: &[f64],
    partition: &GroupPartition,
    method: Method,
    params: &HistogramParams,
) -> Result<RegularizerValue> {
    if raw_scores.len() != partition.len() {
        return Err(Error::DimensionMismatch {
            expected: partition.len(),
            actual: raw_scores.len(),
        });
    }
    if let Some(bad) = raw_scores.iter().find(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("raw score {bad}")));
    }
    for g in partition.groups() {
        if g.indices.len() < 2 {
            return Err(Error::GroupTooSmall {
                group: g.key.to_string(),
                size: g.indices.len(),
                required: 2,
            });
        }
    }
    let mut value = 0.0;
    let mut gradient = vec![0.0; raw_scores.len()];
    for (g0, g1) in partition.pairs() {
        let r0 = gather(raw_scores, g0);
        let r1 = gather(raw_scores, g1);
        let pair = match method {
            Method::Gaussian => gaussian_pair(&r0, &r1),
            Method::Histogram => histogram_pair(&r0, &r1, params)?,
        };
        value += pair.value;
        for (&i, d) in g0.indices.iter().zip(pair.grad0) {
            gradient[i] += d;
        }
        for (&i, d) in g1.indices.iter().zip(pair.grad1) {
            gradient[i] += d;
        }
    }
    Ok(RegularizerValue { value, gradient })
}

fn expect_mode(partition: &GroupPartition, mode: PartitionMode) -> Result<()> {
    if partition.mode() != mode {
        return Err(Error::InvalidArgument(format!(
            "expected a {mode:?} partition, got {:?}",
            partition.mode()
        )));
    }
    Ok(())
}

/// `d(r(D₀), r(D₁))`.
pub fn regularizer_dp(
    raw_scores: &[f64],
    partition: &GroupPartition,
    method: Method,
    params: &HistogramParams,
) -> Result<RegularizerValue> {
    expect_mode(partition, PartitionMode::DemographicParity)?;
    regularizer(raw_scores, partition, method, params)
}

/// `d(r(D₀ₙ), r(D₁ₙ)) + d(r(D₀ₚ), r(D₁ₚ))`.
pub fn regularizer_eo(
    raw_scores: &[f64],
    partition: &GroupPartition,
    method: Method,
    params: &HistogramParams,
) -> Result<RegularizerValue> {
    expect_mode(partition, PartitionMode::EqualizedOdds)?;
    regularizer(raw_scores, partition, method, params)
}

/// Soft histogram of every group's risk scores.
pub fn group_histograms(
    raw_scores: &[f64],
    partition: &GroupPartition,
    params: &HistogramParams,
) -> Result<Vec<(GroupKey, SoftHistogram)>> {
    partition
        .groups()
        .iter()
        .map(|g| {
            let s: Vec<f64> = gather(raw_scores, g).into_iter().map(sigmoid).collect();
            Ok((g.key, soft_histogram_values(&s, params)?))
        })
        .collect()
}

pub fn group_moments(raw_scores: &[f64], partition: &GroupPartition) -> Result<Vec<(GroupKey, GaussianMoments)>> {
    partition
        .groups()
        .iter()
        .map(|g| Ok((g.key, gaussian_moments(&gather(raw_scores, g))?)))
        .collect()
}

/// CSV `group,bin_center,mass`.
pub fn write_histogram_dump<W: Write>(out: W, hists: &[(GroupKey, SoftHistogram)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "bin_center", "mass"])?;
    for (key, h) in hists {
        for (c, m) in h.centers.iter().zip(&h.mass) {
            w.write_record([key.to_string(), c.to_string(), m.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<histogram dump>", e))?;
    Ok(())
}

/// CSV `group,mu,var`.
pub fn write_moments_dump<W: Write>(out: W, moments: &[(GroupKey, GaussianMoments)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "mu", "var"])?;
    for (key, m) in moments {
        w.write_record([key.to_string(), m.mu.to_string(), m.var.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<moments dump>", e))?;
    Ok(())
}
