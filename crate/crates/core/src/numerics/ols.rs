//! Ordinary least squares with an intercept, solved through a Householder QR
//! factorization of the design matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{AuditError, Result};

/// Result of an OLS fit. `coefficients[0]` is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModelFit {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Diagonal of the projection (hat) matrix.
    pub leverages: Vec<f64>,
    /// Residual sum of squares divided by `n - p - 1`.
    pub sigma2: f64,
    /// Number of predictors, intercept excluded.
    pub p: usize,
    pub n: usize,
}

impl LinearModelFit {
    /// Predictions for new rows (no intercept column in `x`).
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.p {
            return Err(AuditError::DimensionMismatch(format!(
                "model trained on {} predictors, got {}",
                self.p,
                x.ncols()
            )));
        }
        Ok((0..x.nrows())
            .map(|i| {
                self.coefficients[0]
                    + (0..self.p)
                        .map(|j| self.coefficients[j + 1] * x[(i, j)])
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn rss(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// Relative threshold on `|R_jj|` below which a column counts as collinear.
const RANK_TOLERANCE: f64 = 1e-10;

/// Fits `y ~ 1 + X`. Columns are named `x1..xp` in singularity errors.
pub fn ols_fit(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearModelFit> {
    let names: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    ols_fit_named(x, y, &names)
}

/// Fits `y ~ 1 + X`, naming offending columns from `names` on rank deficiency.
pub fn ols_fit_named(x: &DMatrix<f64>, y: &[f64], names: &[String]) -> Result<LinearModelFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(AuditError::DimensionMismatch(format!(
            "{n} design rows, {} responses",
            y.len()
        )));
    }
    if n <= p + 1 {
        return Err(AuditError::invalid(format!(
            "OLS needs more observations ({n}) than parameters plus one ({})",
            p + 1
        )));
    }
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let qr = design.clone().qr();
    let r = qr.r();
    let q = qr.q();
    let scale = (0..=p).map(|j| design.column(j).norm()).fold(0.0, f64::max);
    for j in 0..=p {
        if r[(j, j)].abs() <= RANK_TOLERANCE * scale.max(1.0) {
            let name = if j == 0 {
                "intercept".to_string()
            } else {
                names.get(j - 1).cloned().unwrap_or_else(|| format!("x{j}"))
            };
            return Err(AuditError::Singular { column: j, name });
        }
    }
    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let beta = r.solve_upper_triangular(&qty).ok_or(AuditError::Singular {
        column: p,
        name: "design".into(),
    })?;
    let fitted_v = &design * &beta;
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let leverages = (0..n).map(|i| q.row(i).norm_squared()).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(LinearModelFit {
        coefficients: beta.iter().copied().collect(),
        fitted,
        residuals,
        leverages,
        sigma2: rss / (n - p - 1) as f64,
        p,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normal_sample, Prng};

    fn random_design(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, Vec<f64>) {
        let mut prng = Prng::new(seed);
        let x = DMatrix::from_fn(n, p, |_, _| prng.uniform() * 4.0 - 2.0);
        let noise = normal_sample(&mut prng, n);
        let y = (0..n)
            .map(|i| 1.0 + (0..p).map(|j| (j + 1) as f64 * x[(i, j)]).sum::<f64>() + noise[i])
            .collect();
        (x, y)
    }

    #[test]
    fn exact_line() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let fit = ols_fit(&x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn constant_response() {
        let x = DMatrix::from_row_slice(4, 1, &[0.5, 1.0, 3.0, 7.0]);
        let fit = ols_fit(&x, &[2.5; 4]).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn leverages_sum_to_parameter_count() {
        let (x, y) = random_design(3, 50, 3);
        let fit = ols_fit(&x, &y).unwrap();
        let trace: f64 = fit.leverages.iter().sum();
        assert!((trace - 4.0).abs() < 1e-8, "trace {trace}");
        assert!(fit.leverages.iter().all(|h| (0.0..=1.0).contains(h)));
        for i in 0..50 {
            assert!((fit.fitted[i] + fit.residuals[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let (x, y) = random_design(9, 80, 4);
        let fit = ols_fit(&x, &y).unwrap();
        let s: f64 = fit.residuals.iter().sum();
        assert!(s.abs() < 1e-8);
        for j in 0..4 {
            let dot: f64 = (0..80).map(|i| x[(i, j)] * fit.residuals[i]).sum();
            assert!(dot.abs() < 1e-8);
        }
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let (x, y) = random_design(5, 30, 2);
        let fit = ols_fit(&x, &y).unwrap();
        // Independent route: solve (X'X) b = X'y by Cramer's rule on the 3x3 system.
        let d = DMatrix::from_fn(30, 3, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
        let xtx = d.transpose() * &d;
        let xty = d.transpose() * DVector::from_column_slice(&y);
        let det = |m: &DMatrix<f64>| {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        };
        let base = det(&xtx);
        for k in 0..3 {
            let mut m = xtx.clone();
            m.set_column(k, &xty);
            assert!((det(&m) / base - fit.coefficients[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_column_named() {
        let x = DMatrix::from_row_slice(5, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0, 5.0, 10.0]);
        let names = vec!["a".to_string(), "b".to_string()];
        let err = ols_fit_named(&x, &[1.0, 2.0, 3.0, 4.0, 6.0], &names).unwrap_err();
        assert_eq!(
            err,
            AuditError::Singular {
                column: 2,
                name: "b".into()
            }
        );
        let flat = DMatrix::from_row_slice(4, 1, &[3.0, 3.0, 3.0, 3.0]);
        assert!(matches!(
            ols_fit(&flat, &[1.0, 2.0, 3.0, 4.0]),
            Err(AuditError::Singular { column: 1, .. })
        ));
    }

    #[test]
    fn too_few_rows() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(ols_fit(&x, &[1.0, 2.0]).is_err());
    }
}
