//! LOWESS scatterplot smoother: local linear fits with tricube weights, no
//! robustness iterations.

use crate::error::{AuditError, Result};

/// Default fraction of points used in each local fit.
pub const DEFAULT_SPAN: f64 = 2.0 / 3.0;

/// Smoothed values at each `x`, using the `ceil(span * n)` nearest neighbours.
pub fn lowess(x: &[f64], y: &[f64], span: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if y.len() != n {
        return Err(AuditError::DimensionMismatch(format!(
            "{} x values, {} y values",
            n,
            y.len()
        )));
    }
    if n < 3 {
        return Err(AuditError::invalid("lowess needs at least 3 points"));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(AuditError::invalid(format!("span {span} outside (0, 1]")));
    }
    let q = ((span * n as f64).ceil() as usize).clamp(2, n);
    let mut dist = vec![0.0; n];
    let mut w = vec![0.0; n];
    Ok((0..n)
        .map(|i| {
            for j in 0..n {
                dist[j] = (x[j] - x[i]).abs();
            }
            let mut sorted = dist.clone();
            sorted.select_nth_unstable_by(q - 1, |a, b| a.partial_cmp(b).unwrap());
            let h = sorted[q - 1];
            for j in 0..n {
                w[j] = if h > 0.0 {
                    let u = dist[j] / h;
                    if u < 1.0 {
                        (1.0 - u * u * u).powi(3)
                    } else {
                        0.0
                    }
                } else if dist[j] == 0.0 {
                    1.0
                } else {
                    0.0
                };
            }
            local_linear(x, y, &w, x[i])
        })
        .collect())
}

fn local_linear(x: &[f64], y: &[f64], w: &[f64], at: f64) -> f64 {
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for j in 0..x.len() {
        let dx = x[j] - xm;
        sxx += w[j] * dx * dx;
        sxy += w[j] * dx * (y[j] - ym);
    }
    let range = x.iter().fold(0.0f64, |m, v| m.max((v - xm).abs()));
    if sxx <= 1e-12 * sw * range * range {
        return ym;
    }
    ym + sxy / sxx * (at - xm)
}
