//! Slow, independent oracles for tests: hard histograms, central finite
//! differences and parity by literal counting. Nothing here calls into the
//! production paths it is used to check.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HardHistogram {
    pub centers: Vec<f64>,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub mass: Vec<f64>,
}

/// Rectangular-window histogram on `[0, 1]`. Bins are `[lo, hi)` except the
/// last, which is closed.
pub fn hard_histogram(scores: &[f64], n_bins: usize) -> Result<HardHistogram> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("empty score set".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let width = 1.0 / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("score {s} outside [0, 1]")));
        }
        let mut bin = n_bins - 1;
        for j in 0..n_bins {
            let hi = (j + 1) as f64 / n_bins as f64;
            if s < hi {
                bin = j;
                break;
            }
        }
        counts[bin] += 1;
    }
    let total = scores.len() as f64;
    Ok(HardHistogram {
        centers: (0..n_bins).map(|j| (2 * j + 1) as f64 / (2 * n_bins) as f64).collect(),
        bin_width: width,
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
        counts,
    })
}

/// Central differences `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h`.
pub fn finite_diff<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!("f near coordinate {i}")));
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// `(ΔDP, ΔEO)` by counting each sample into its group by hand. `ΔEO` is
/// `None` when one of the four (A, Y) groups is empty.
pub fn exhaustive_parity(
    scores: &[f64],
    labels: &[u8],
    protected: &[u8],
    threshold: f64,
) -> Result<(f64, Option<f64>)> {
    if scores.len() != labels.len() || scores.len() != protected.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    // [a][y] -> (positives, total)
    let mut cells = [[(0u64, 0u64); 2]; 2];
    for k in 0..scores.len() {
        let positive = if scores[k] > threshold { 1 } else { 0 };
        let cell = &mut cells[protected[k] as usize][labels[k] as usize];
        cell.0 += positive;
        cell.1 += 1;
    }
    let rate = |pos: u64, tot: u64| pos as f64 / tot as f64;
    let mut dp_rates = [0.0; 2];
    for a in 0..2 {
        let pos = cells[a][0].0 + cells[a][1].0;
        let tot = cells[a][0].1 + cells[a][1].1;
        if tot == 0 {
            return Err(Error::EmptyGroup(format!("A={a}")));
        }
        dp_rates[a] = rate(pos, tot);
    }
    let delta_dp = (dp_rates[0] - dp_rates[1]).abs();
    let mut eo = None;
    if cells.iter().all(|row| row.iter().all(|c| c.1 > 0)) {
        let fpr = (rate(cells[0][0].0, cells[0][0].1) - rate(cells[1][0].0, cells[1][0].1)).abs();
        let tpr = (rate(cells[0][1].0, cells[0][1].1) - rate(cells[1][1].0, cells[1][1].1)).abs();
        eo = Some(0.5 * (fpr + tpr));
    }
    Ok((delta_dp, eo))
}
