//! Synthetic regression data with two planted outliers.
//!
//! `y = 20(x1 - 1)² + 2(x2 - 0.25)(x2 - 0.5)(x2 - 1) + 22 x3 - 1 + 5 x4 x1 + ε`
//! with `x1..x3 ~ U[0, 1]`, `x4 ∈ {0, 1, 4}` and Gaussian noise.

use crate::data::{AuditFrame, Column};
use crate::error::Result;
use crate::numerics::{normal_quantile, Prng};

pub const AUDITOR_ROWS: usize = 2000;
pub const AUDITOR_BASE_ROWS: usize = 1998;
/// Variance of the noise term.
pub const NOISE_VARIANCE: f64 = 0.5;
pub const AUDITOR_HEADER: [&str; 5] = ["y", "X1", "X2", "X3", "X4"];

/// The two appended rows, as `(y, x1, x2, x3, x4)`.
pub const OUTLIERS: [[f64; 5]; 2] = [[92.0, 0.32, 0.21, 0.1, 0.0], [98.0, 0.86, 0.82, 0.85, 0.0]];

/// Noise-free part of the response.
pub fn auditor_mean(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    20.0 * (x1 - 1.0).powi(2) + 2.0 * (x2 - 0.25) * (x2 - 0.5) * (x2 - 1.0) + 22.0 * x3 - 1.0
        + 5.0 * x4 * x1
}

/// Rows `(y, x1, x2, x3, x4)`. Each generated row consumes, in order, three
/// uniforms for the predictors, one uniform for `x4` and one normal draw.
pub fn generate_auditor_rows(seed: u64) -> Vec<[f64; 5]> {
    let mut prng = Prng::new(seed);
    let sd = NOISE_VARIANCE.sqrt();
    let mut rows = Vec::with_capacity(AUDITOR_ROWS);
    for _ in 0..AUDITOR_BASE_ROWS {
        let x1 = prng.uniform();
        let x2 = prng.uniform();
        let x3 = prng.uniform();
        let u = prng.uniform();
        let x4 = if u < 0.5 {
            0.0
        } else if u < 0.85 {
            1.0
        } else {
            4.0
        };
        let eps = sd * normal_quantile(prng.uniform_open()).expect("open interval");
        rows.push([auditor_mean(x1, x2, x3, x4) + eps, x1, x2, x3, x4]);
    }
    rows.extend(OUTLIERS);
    rows
}

/// The same data as an [`AuditFrame`] with numeric variables `X1..X4`.
pub fn generate_auditor_data(seed: u64) -> Result<AuditFrame> {
    let rows = generate_auditor_rows(seed);
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let variables = (1..5)
        .map(|j| (AUDITOR_HEADER[j].to_string(), Column::Numeric(col(j))))
        .collect();
    AuditFrame::new(col(0), vec![], variables)
}
