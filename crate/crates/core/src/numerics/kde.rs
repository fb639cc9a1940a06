//! Gaussian kernel density estimation with Silverman's rule-of-thumb bandwidth.

use std::f64::consts::PI;

use super::stats::{quantile_sorted, sorted, variance_sample};
use crate::error::{AuditError, Result};

/// `0.9 · min(sd, IQR / 1.34) · n^(-1/5)`; falls back to `sd` when the IQR is zero.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(AuditError::DegenerateBandwidth(
            "need at least two values".into(),
        ));
    }
    let sd = variance_sample(values).sqrt();
    if !(sd > 0.0) {
        return Err(AuditError::DegenerateBandwidth(
            "all values are identical".into(),
        ));
    }
    let s = sorted(values);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Density estimate at each grid point using a fixed bandwidth.
pub fn kde_with_bandwidth(values: &[f64], grid: &[f64], bandwidth: f64) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    grid.iter()
        .map(|g| {
            values
                .iter()
                .map(|v| {
                    let u = (g - v) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Gaussian KDE on `grid` with the Silverman bandwidth of `values`.
pub fn kde_gaussian(values: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let bw = silverman_bandwidth(values)?;
    Ok(kde_with_bandwidth(values, grid, bw))
}

/// `points` evenly spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}
