//! Cook's distance and half-normal simulation envelopes.

use std::collections::BTreeMap;
use std::thread;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::ScoreResult;
use crate::error::{AuditError, Result};
use crate::models::{Capability, ModelHandle, ModelSession};
use crate::numerics::stats::{quantile_sorted, sorted};
use crate::numerics::{normal_quantile, ols_fit};

/// Leverages within this distance of 1 are treated as exactly 1.
const LEVERAGE_ONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CooksMethod {
    HatMatrix,
    LooRefit,
}

/// Residual variance estimate used in the Cook's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceRule {
    /// `RSS / (n - p - 1)`.
    #[default]
    Unbiased,
    /// `RSS / n`.
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CooksOptions {
    /// `None` picks the hat-matrix path for built-in OLS, refits otherwise.
    pub method: Option<CooksMethod>,
    /// Predictor count in the denominator; defaults to the design width
    /// (at least 1).
    pub p: Option<usize>,
    pub variance: VarianceRule,
    pub top_k: usize,
    pub workers: usize,
}

impl Default for CooksOptions {
    fn default() -> Self {
        CooksOptions {
            method: None,
            p: None,
            variance: VarianceRule::Unbiased,
            top_k: 5,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooksResult {
    #[serde(with = "crate::serde_float::vec")]
    pub d: Vec<f64>,
    pub method: CooksMethod,
    pub p: usize,
    pub s2: f64,
    /// Indices of the largest distances, descending.
    pub top_k: Vec<usize>,
    pub warnings: Vec<String>,
}

impl CooksResult {
    /// Largest distance as a score; components carry its index, `p` and `s²`.
    pub fn score(&self, label: &str) -> ScoreResult {
        let (arg, max) = self
            .d
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            );
        ScoreResult::new("cooksdistance", label, max)
            .with("argmax", arg as f64)
            .with("p", self.p as f64)
            .with("s2", self.s2)
    }
}

/// Indices of the `k` largest values, descending, ties by index.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn variance(rss: f64, n: usize, p: usize, rule: VarianceRule) -> f64 {
    match rule {
        VarianceRule::Unbiased => rss / (n - p - 1) as f64,
        VarianceRule::Mean => rss / n as f64,
    }
}

fn drop_row(x: &DMatrix<f64>, y: &[f64], i: usize) -> (DMatrix<f64>, Vec<f64>) {
    let xi = x.clone().remove_row(i);
    let mut yi = y.to_vec();
    yi.remove(i);
    (xi, yi)
}

/// Splits `0..n` into `workers` contiguous chunks and maps each on its own
/// session. Output is in index order regardless of the worker count.
fn map_chunks<T: Send>(
    handle: &ModelHandle,
    n: usize,
    workers: usize,
    f: impl Fn(&mut dyn ModelSession, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let workers = workers.clamp(1, n.max(1));
    let chunk = n.div_ceil(workers).max(1);
    let run = |lo: usize, hi: usize| -> Result<Vec<T>> {
        let mut session = handle.open()?;
        (lo..hi).map(|i| f(session.as_mut(), i)).collect()
    };
    if workers == 1 {
        return run(0, n);
    }
    let parts: Vec<Result<Vec<T>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|lo| {
                let run = &run;
                s.spawn(move || run(lo, (lo + chunk).min(n)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Cook's distance of every observation.
///
/// The hat-matrix path (built-in OLS only) uses
/// `D_i = r_i² / (p s²) · h_i / (1 - h_i)²`; the refit path removes each
/// observation, refits, predicts all `n` rows and sums squared changes.
pub fn cooks_distance(
    handle: &ModelHandle,
    x: &DMatrix<f64>,
    y: &[f64],
    opts: &CooksOptions,
) -> Result<CooksResult> {
    handle.require(&[Capability::Fit, Capability::Predict])?;
    let n = x.nrows();
    if y.len() != n {
        return Err(AuditError::DimensionMismatch(format!(
            "{n} design rows, {} responses",
            y.len()
        )));
    }
    let p = opts.p.unwrap_or(x.ncols()).max(1);
    if n <= p + 2 {
        return Err(AuditError::invalid(format!(
            "Cook's distance needs n > p + 2 (n = {n}, p = {p})"
        )));
    }
    let method = opts.method.unwrap_or(if handle.is_builtin_ols() {
        CooksMethod::HatMatrix
    } else {
        CooksMethod::LooRefit
    });
    let mut warnings = Vec::new();
    let (d, s2) = match method {
        CooksMethod::HatMatrix => {
            if !handle.is_builtin_ols() {
                return Err(AuditError::invalid(
                    "hat-matrix Cook's distance requires the built-in OLS model",
                ));
            }
            let fit = ols_fit(x, y)?;
            let s2 = variance(fit.rss(), n, p, opts.variance);
            let d: Vec<f64> = fit
                .residuals
                .iter()
                .zip(&fit.leverages)
                .enumerate()
                .map(|(i, (r, h))| {
                    if 1.0 - h <= LEVERAGE_ONE_TOL {
                        warnings.push(format!(
                            "observation {i} has leverage 1; Cook's distance set to +inf"
                        ));
                        f64::INFINITY
                    } else {
                        r * r / (p as f64 * s2) * h / ((1.0 - h) * (1.0 - h))
                    }
                })
                .collect();
            (d, s2)
        }
        CooksMethod::LooRefit => {
            let mut full = handle.open()?;
            full.fit(x, y)?;
            let y_hat = full.predict(x)?;
            drop(full);
            let rss: f64 = y.iter().zip(&y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
            let s2 = variance(rss, n, p, opts.variance);
            let per = map_chunks(handle, n, opts.workers, |session, i| {
                let (xi, yi) = drop_row(x, y, i);
                match session.fit(&xi, &yi) {
                    Ok(()) => {}
                    Err(AuditError::Singular { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
                let pred = session.predict(x)?;
                let ss: f64 = y_hat
                    .iter()
                    .zip(&pred)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                Ok(Some(ss / (p as f64 * s2)))
            })?;
            let d: Vec<f64> = per
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.unwrap_or_else(|| {
                        warnings.push(format!("refit without observation {i} is singular; Cook's distance set to +inf"));
                        f64::INFINITY
                    })
                })
                .collect();
            (d, s2)
        }
    };
    let top_k = top_k_indices(&d, opts.top_k);
    Ok(CooksResult {
        d,
        method,
        p,
        s2,
        top_k,
        warnings,
    })
}

/// Quantity whose absolute values are compared against the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfNormalDiagnostic {
    #[default]
    Raw,
    /// `r_i / sqrt(s² (1 - h_i))`; built-in OLS only.
    Standardized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfNormalOptions {
    pub m: usize,
    pub seed: u64,
    pub diagnostic: HalfNormalDiagnostic,
    pub workers: usize,
}

impl HalfNormalOptions {
    pub fn new(m: usize, seed: u64) -> Self {
        HalfNormalOptions {
            m,
            seed,
            diagnostic: HalfNormalDiagnostic::Raw,
            workers: 1,
        }
    }
}

pub const MIN_SIMULATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfNormalResult {
    pub m: usize,
    pub seed: u64,
    pub diagnostic: HalfNormalDiagnostic,
    #[serde(with = "crate::serde_float::vec")]
    pub sorted_abs_diag: Vec<f64>,
    #[serde(with = "crate::serde_float::vec")]
    pub theoretical_q: Vec<f64>,
    #[serde(with = "crate::serde_float::vec")]
    pub env_lo: Vec<f64>,
    #[serde(with = "crate::serde_float::vec")]
    pub env_hi: Vec<f64>,
    pub s: Vec<usize>,
    pub hn_score: f64,
    /// The model could not honor the seed.
    pub nondeterministic: bool,
}

impl HalfNormalResult {
    /// Share of observed values inside `[env_lo, env_hi]`.
    pub fn coverage(&self) -> f64 {
        let inside = (0..self.sorted_abs_diag.len())
            .filter(|&i| (self.env_lo[i]..=self.env_hi[i]).contains(&self.sorted_abs_diag[i]))
            .count();
        inside as f64 / self.sorted_abs_diag.len() as f64
    }
}

/// Expected half-normal order statistics `Φ⁻¹((i + n - 1/8) / (2n + 1/2))`, `i = 1..n`.
pub fn halfnormal_quantiles(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            normal_quantile((i as f64 + n as f64 - 0.125) / (2.0 * n as f64 + 0.5))
                .expect("argument inside (0, 1)")
        })
        .collect()
}

/// `S_i = #{j : sim_j[i] >= obs[i]}` and `HN = Σ |S_i - m/2|`, comparing
/// sorted observed values with sorted simulated ones rank by rank.
pub fn halfnormal_counts(obs_sorted: &[f64], sims_sorted: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let m = sims_sorted.len() as f64;
    let s: Vec<usize> = obs_sorted
        .iter()
        .enumerate()
        .map(|(i, &o)| sims_sorted.iter().filter(|sim| sim[i] >= o).count())
        .collect();
    let hn = s.iter().map(|&c| (c as f64 - m / 2.0).abs()).sum();
    (s, hn)
}

/// Per-rank 2.5% and 97.5% percentiles across simulations.
pub fn envelope(sims_sorted: &[Vec<f64>], n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|i| {
            let col = sorted(&sims_sorted.iter().map(|s| s[i]).collect::<Vec<_>>());
            (quantile_sorted(&col, 0.025), quantile_sorted(&col, 0.975))
        })
        .unzip()
}

fn abs_diagnostic(
    session: &mut dyn ModelSession,
    x: &DMatrix<f64>,
    y: &[f64],
    diag: HalfNormalDiagnostic,
) -> Result<Vec<f64>> {
    session.fit(x, y)?;
    let values: Vec<f64> = match diag {
        HalfNormalDiagnostic::Raw => {
            let y_hat = session.predict(x)?;
            y.iter().zip(&y_hat).map(|(a, b)| (a - b).abs()).collect()
        }
        HalfNormalDiagnostic::Standardized => {
            let fit = session.linear_fit().ok_or_else(|| {
                AuditError::invalid("standardized half-normal diagnostic requires built-in OLS")
            })?;
            fit.residuals
                .iter()
                .zip(&fit.leverages)
                .map(|(r, h)| {
                    let scale = (fit.sigma2 * (1.0 - h)).sqrt();
                    if scale > 0.0 {
                        (r / scale).abs()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    Ok(sorted(&values))
}

/// Half-normal plot with a simulated envelope.
pub fn halfnormal(
    handle: &ModelHandle,
    x: &DMatrix<f64>,
    y: &[f64],
    opts: &HalfNormalOptions,
) -> Result<HalfNormalResult> {
    handle.require(&[Capability::Fit, Capability::Predict, Capability::Simulate])?;
    if opts.m < MIN_SIMULATIONS {
        return Err(AuditError::invalid(format!(
            "half-normal envelope needs at least {MIN_SIMULATIONS} simulations, got {}",
            opts.m
        )));
    }
    if opts.diagnostic == HalfNormalDiagnostic::Standardized && !handle.is_builtin_ols() {
        return Err(AuditError::invalid(
            "standardized half-normal diagnostic requires built-in OLS",
        ));
    }
    let n = x.nrows();
    if y.len() != n {
        return Err(AuditError::DimensionMismatch(format!(
            "{n} design rows, {} responses",
            y.len()
        )));
    }
    let mut main = handle.open()?;
    let observed = abs_diagnostic(main.as_mut(), x, y, opts.diagnostic)?;
    let ysim = main.simulate(opts.m, opts.seed)?;
    drop(main);
    if ysim.len() != opts.m || ysim.iter().any(|v| v.len() != n) {
        return Err(AuditError::invalid(
            "simulation returned vectors of the wrong shape",
        ));
    }
    let sims = map_chunks(handle, opts.m, opts.workers, |session, j| {
        abs_diagnostic(session, x, &ysim[j], opts.diagnostic)
    })?;
    let (env_lo, env_hi) = envelope(&sims, n);
    let (s, hn_score) = halfnormal_counts(&observed, &sims);
    Ok(HalfNormalResult {
        m: opts.m,
        seed: opts.seed,
        diagnostic: opts.diagnostic,
        sorted_abs_diag: observed,
        theoretical_q: halfnormal_quantiles(n),
        env_lo,
        env_hi,
        s,
        hn_score,
        nondeterministic: handle.is_nondeterministic(),
    })
}

/// The half-normal score; lower means a better fit.
pub fn score_halfnormal(label: &str, result: &HalfNormalResult) -> ScoreResult {
    let mut score = ScoreResult::new("halfnormal", label, result.hn_score)
        .with("m", result.m as f64)
        .with("coverage", result.coverage());
    if result.nondeterministic {
        score = score.with("nondeterministic", 1.0);
    }
    score
}

/// Aggregated per-observation Cook's summary keyed by index, for reports.
pub fn cooks_table(result: &CooksResult) -> BTreeMap<usize, f64> {
    result.top_k.iter().map(|&i| (i, result.d[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normal_sample, Prng};

    fn dataset(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, Vec<f64>) {
        let mut prng = Prng::new(seed);
        let x = DMatrix::from_fn(n, p, |_, _| prng.uniform() * 2.0 - 1.0);
        let e = normal_sample(&mut prng, n);
        let y = (0..n)
            .map(|i| 0.5 + (0..p).map(|j| x[(i, j)] * (j as f64 + 1.0)).sum::<f64>() + e[i])
            .collect();
        (x, y)
    }

    #[test]
    fn dual_path_agrees() {
        let (x, y) = dataset(1, 50, 3);
        let h = ModelHandle::ols();
        let hat = cooks_distance(&h, &x, &y, &CooksOptions::default()).unwrap();
        let loo = cooks_distance(
            &h,
            &x,
            &y,
            &CooksOptions {
                method: Some(CooksMethod::LooRefit),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(hat.method, CooksMethod::HatMatrix);
        for (a, b) in hat.d.iter().zip(&loo.d) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300), "{a} vs {b}");
        }
        assert_eq!(hat.top_k, loo.top_k);
        assert!(hat.d.iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn brute_force_five_points() {
        // Balanced x with a duplicated centre point and an extreme point.
        let xs = [-1.0, 0.0, 0.0, 1.0, 4.0];
        let y = [-0.8, 0.3, -0.2, 1.1, 3.6];
        let x = DMatrix::from_column_slice(5, 1, &xs);
        let res = cooks_distance(&ModelHandle::ols(), &x, &y, &CooksOptions::default()).unwrap();
        // Independent closed-form simple regression for every leave-one-out fit.
        let line = |pts: &[(f64, f64)]| {
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let b = sxy / sxx;
            (my - b * mx, b)
        };
        let all: Vec<(f64, f64)> = xs.iter().copied().zip(y).collect();
        let (a, b) = line(&all);
        let rss: f64 = all.iter().map(|(x, y)| (y - a - b * x).powi(2)).sum();
        let s2 = rss / 3.0;
        for i in 0..5 {
            let rest: Vec<(f64, f64)> = all
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| *p)
                .collect();
            let (ai, bi) = line(&rest);
            let ss: f64 = xs.iter().map(|x| (a + b * x - ai - bi * x).powi(2)).sum();
            assert!((ss / s2 - res.d[i]).abs() < 1e-10 * res.d[i].max(1.0));
        }
        assert!(res.d[1] < res.d[4] && res.d[2] < res.d[4]);
        assert_eq!(res.top_k[0], 4);
    }

    #[test]
    fn constant_model_symmetry() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = [1.0, 3.0, 5.0, 7.0];
        let res =
            cooks_distance(&ModelHandle::constant(), &x, &y, &CooksOptions::default()).unwrap();
        assert_eq!(res.method, CooksMethod::LooRefit);
        assert!((res.d[0] - res.d[3]).abs() < 1e-12);
        assert!((res.d[1] - res.d[2]).abs() < 1e-12);
        assert!(cooks_distance(
            &ModelHandle::constant(),
            &x,
            &y,
            &CooksOptions {
                method: Some(CooksMethod::HatMatrix),
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn leverage_one_is_infinite() {
        // Indicator column isolates the last observation.
        let x = DMatrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0, 2.5, 1.0],
        );
        let y = [0.1, 1.2, 1.9, 3.1, 4.0, 9.0];
        let hat = cooks_distance(&ModelHandle::ols(), &x, &y, &CooksOptions::default()).unwrap();
        assert_eq!(hat.d[5], f64::INFINITY);
        assert_eq!(hat.warnings.len(), 1);
        assert_eq!(hat.top_k[0], 5);
        let loo = cooks_distance(
            &ModelHandle::ols(),
            &x,
            &y,
            &CooksOptions {
                method: Some(CooksMethod::LooRefit),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(loo.d[5], f64::INFINITY);
        for i in 0..5 {
            assert!((hat.d[i] - loo.d[i]).abs() < 1e-8 * hat.d[i].max(1e-12));
        }
        let ser = serde_json::to_string(&hat).unwrap();
        assert!(ser.contains("\"inf\""));
    }

    #[test]
    fn parallel_equals_sequential() {
        let (x, y) = dataset(5, 37, 2);
        let h = ModelHandle::ols();
        let seq = CooksOptions {
            method: Some(CooksMethod::LooRefit),
            ..Default::default()
        };
        let a = cooks_distance(&h, &x, &y, &seq).unwrap();
        let b = cooks_distance(
            &h,
            &x,
            &y,
            &CooksOptions {
                workers: 4,
                ..seq.clone()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        let hn1 = halfnormal(&h, &x, &y, &HalfNormalOptions::new(25, 3)).unwrap();
        let hn3 = halfnormal(
            &h,
            &x,
            &y,
            &HalfNormalOptions {
                workers: 3,
                ..HalfNormalOptions::new(25, 3)
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&hn1).unwrap(),
            serde_json::to_string(&hn3).unwrap()
        );
    }

    #[test]
    fn too_small_rejected() {
        let (x, y) = dataset(2, 5, 3);
        assert!(cooks_distance(&ModelHandle::ols(), &x, &y, &CooksOptions::default()).is_err());
    }

    #[test]
    fn counts_hand_example() {
        let (s, hn) = halfnormal_counts(&[5.0], &[vec![3.0], vec![7.0]]);
        assert_eq!(s, vec![1]);
        assert_eq!(hn, 0.0);
        let (s, hn) = halfnormal_counts(&[1.0, 2.0], &vec![vec![10.0, 20.0]; 4]);
        assert_eq!(s, vec![4, 4]);
        assert_eq!(hn, 2.0 * 4.0 / 2.0);
    }

    #[test]
    fn quantiles_increase() {
        let q = halfnormal_quantiles(10);
        assert!(q.windows(2).all(|w| w[0] < w[1]));
        assert!(q[0] > 0.0);
        // i = 1, n = 1: Φ⁻¹((1 + 1 - 1/8) / 2.5) = Φ⁻¹(0.75)
        assert!((halfnormal_quantiles(1)[0] - 0.6744897501960817).abs() < 1e-12);
    }

    #[test]
    fn halfnormal_contract() {
        let (x, y) = dataset(8, 40, 2);
        let h = ModelHandle::ols();
        assert!(halfnormal(&h, &x, &y, &HalfNormalOptions::new(19, 1)).is_err());
        let r = halfnormal(&h, &x, &y, &HalfNormalOptions::new(40, 1)).unwrap();
        assert!(r.hn_score >= 0.0 && r.hn_score <= 40.0 * 40.0 / 2.0);
        assert!(r.s.iter().all(|&s| s <= 40));
        assert!(r.env_lo.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.env_hi.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.env_lo.iter().zip(&r.env_hi).all(|(a, b)| a <= b));
        assert_eq!(
            r,
            halfnormal(&h, &x, &y, &HalfNormalOptions::new(40, 1)).unwrap()
        );
        let std = halfnormal(
            &h,
            &x,
            &y,
            &HalfNormalOptions {
                diagnostic: HalfNormalDiagnostic::Standardized,
                ..HalfNormalOptions::new(30, 1)
            },
        )
        .unwrap();
        assert!(std.coverage() > 0.5);
        let no_sim = ModelHandle {
            capabilities: [Capability::Fit, Capability::Predict].into(),
            ..ModelHandle::ols()
        };
        assert!(matches!(
            halfnormal(&no_sim, &x, &y, &HalfNormalOptions::new(20, 1)),
            Err(AuditError::MissingCapability { .. })
        ));
        let score = score_halfnormal("ols", &r);
        assert_eq!(score.value, r.hn_score);
    }

    #[test]
    fn cooks_permutation_equivariant() {
        let (x, y) = dataset(3, 20, 2);
        let perm: Vec<usize> = (0..20).rev().collect();
        let xp = DMatrix::from_fn(20, 2, |i, j| x[(perm[i], j)]);
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let a = cooks_distance(&ModelHandle::ols(), &x, &y, &CooksOptions::default()).unwrap();
        let b = cooks_distance(&ModelHandle::ols(), &xp, &yp, &CooksOptions::default()).unwrap();
        for i in 0..20 {
            assert!((a.d[perm[i]] - b.d[i]).abs() < 1e-10 * a.d[perm[i]].max(1e-12));
        }
    }
}
