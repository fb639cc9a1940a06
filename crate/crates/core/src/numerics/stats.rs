//! Small descriptive statistics helpers and the empirical CDF.

use std::cmp::Ordering;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Variance with divisor `n`.
pub fn variance_pop(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Variance with divisor `n - 1`.
pub fn variance_sample(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    s
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// ascending `sorted` data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Empirical CDF as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    /// Sorted unique sample values.
    pub values: Vec<f64>,
    /// `F_n(values[k])`.
    pub cumulative: Vec<f64>,
    pub n: usize,
}

impl Ecdf {
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|v| *v <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// `F_n(t) = #{x_i <= t} / n`.
///
/// # Panics
/// On empty input.
pub fn ecdf(values: &[f64]) -> Ecdf {
    assert!(!values.is_empty(), "ecdf of an empty sample");
    let s = sorted(values);
    let n = s.len();
    let mut uniq = Vec::new();
    let mut cum = Vec::new();
    for (i, v) in s.iter().enumerate() {
        if i + 1 == n || s[i + 1] != *v {
            uniq.push(*v);
            cum.push((i + 1) as f64 / n as f64);
        }
    }
    Ecdf {
        values: uniq,
        cumulative: cum,
        n,
    }
}
