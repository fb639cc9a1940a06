//! Cyclic Jacobi eigendecomposition for small symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{AuditError, Result};

/// One eigenpair, vector of unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition, pairs sorted by descending eigenvalue. Each
/// vector is signed so that its largest-magnitude component is positive.
pub fn jacobi_eigen(s: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let k = s.nrows();
    if s.ncols() != k {
        return Err(AuditError::DimensionMismatch("matrix is not square".into()));
    }
    for i in 0..k {
        for j in 0..i {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-10 {
                return Err(AuditError::invalid(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut a = s.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * total || off == 0.0 {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for r in 0..k {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - sn * arq;
                    a[(r, q)] = sn * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - sn * aqr;
                    a[(q, r)] = sn * apr + c * aqr;
                }
                for r in 0..k {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - sn * vrq;
                    v[(r, q)] = sn * vrp + c * vrq;
                }
            }
        }
    }
    let mut pairs: Vec<EigenPair> = (0..k)
        .map(|j| {
            let mut vector: Vec<f64> = v.column(j).iter().copied().collect();
            let lead = vector
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                vector.iter_mut().for_each(|x| *x = -*x);
            }
            EigenPair {
                value: a[(j, j)],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|x, y| {
        y.value
            .partial_cmp(&x.value)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(pairs)
}

/// The two largest eigenpairs of a symmetric `k × k` matrix, `k >= 2`.
pub fn sym_eigen_2pc(s: &DMatrix<f64>) -> Result<[EigenPair; 2]> {
    if s.nrows() < 2 {
        return Err(AuditError::invalid("need at least a 2x2 matrix"));
    }
    let mut pairs = jacobi_eigen(s)?;
    pairs.truncate(2);
    let second = pairs.pop().unwrap();
    let first = pairs.pop().unwrap();
    Ok([first, second])
}
