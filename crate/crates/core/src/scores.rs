//! Scalar diagnostics: error magnitudes, residual independence, curve areas.
//!
//! Residual-order diagnostics (DW, runs, peak, ACF) sort the frame by its
//! ordering axis first, so callers may pass frames in any row order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curves;
use crate::data::{sort_by_order, ClassificationFrame, ResidualFrame, ScoreResult};
use crate::error::{AuditError, Result};
use crate::numerics::stats::mean;

/// Score identifiers accepted by `score --type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreId {
    #[serde(rename = "cooksdistance")]
    CooksDistance,
    Dw,
    #[serde(rename = "halfnormal")]
    HalfNormal,
    Mae,
    Mse,
    Rec,
    Rmse,
    Auprc,
    Auc,
    Rroc,
    Runs,
    Peak,
}

impl ScoreId {
    pub const ALL: [ScoreId; 12] = [
        ScoreId::CooksDistance,
        ScoreId::Dw,
        ScoreId::HalfNormal,
        ScoreId::Mae,
        ScoreId::Mse,
        ScoreId::Rec,
        ScoreId::Rmse,
        ScoreId::Auprc,
        ScoreId::Auc,
        ScoreId::Rroc,
        ScoreId::Runs,
        ScoreId::Peak,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ScoreId::CooksDistance => "cooksdistance",
            ScoreId::Dw => "dw",
            ScoreId::HalfNormal => "halfnormal",
            ScoreId::Mae => "mae",
            ScoreId::Mse => "mse",
            ScoreId::Rec => "rec",
            ScoreId::Rmse => "rmse",
            ScoreId::Auprc => "auprc",
            ScoreId::Auc => "auc",
            ScoreId::Rroc => "rroc",
            ScoreId::Runs => "runs",
            ScoreId::Peak => "peak",
        }
    }

    /// Scores that refit a model rather than reading stored predictions.
    pub fn needs_refit(self) -> bool {
        matches!(self, ScoreId::CooksDistance | ScoreId::HalfNormal)
    }

    pub fn is_classification(self) -> bool {
        matches!(self, ScoreId::Auc | ScoreId::Auprc)
    }
}

impl fmt::Display for ScoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ScoreId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        // "roc" names the ROC area in the original score table.
        if s == "roc" {
            return Ok(ScoreId::Auc);
        }
        ScoreId::ALL
            .iter()
            .copied()
            .find(|k| k.id() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = ScoreId::ALL.iter().map(|k| k.id()).collect();
                format!("unknown score `{s}`; valid scores: {}", valid.join(", "))
            })
    }
}

pub fn score_mae(rf: &ResidualFrame) -> ScoreResult {
    ScoreResult::new(
        "mae",
        &rf.label,
        mean(&rf.r.iter().map(|r| r.abs()).collect::<Vec<_>>()),
    )
}

fn mse(r: &[f64]) -> f64 {
    r.iter().map(|r| r * r).sum::<f64>() / r.len() as f64
}

pub fn score_mse(rf: &ResidualFrame) -> ScoreResult {
    ScoreResult::new("mse", &rf.label, mse(&rf.r))
}

pub fn score_rmse(rf: &ResidualFrame) -> ScoreResult {
    ScoreResult::new("rmse", &rf.label, mse(&rf.r).sqrt())
}

/// Durbin-Watson ratio of squared successive differences to squared residuals.
pub fn score_dw(rf: &ResidualFrame) -> Result<ScoreResult> {
    if rf.n() < 2 {
        return Err(AuditError::UndefinedScore {
            score: "dw".into(),
            reason: "needs at least 2 residuals".into(),
        });
    }
    let r = sort_by_order(rf).r;
    let den: f64 = r.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(AuditError::UndefinedScore {
            score: "dw".into(),
            reason: "all residuals are zero".into(),
        });
    }
    let num: f64 = r.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(ScoreResult::new("dw", &rf.label, num / den))
}

/// Wald-Wolfowitz sign-run statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsComponents {
    /// Observed number of runs.
    pub runs: f64,
    pub expected: f64,
    pub sd: f64,
    pub z: f64,
    pub positives: usize,
    pub negatives: usize,
}

/// Runs of equal sign in the ordered residuals; exact zeros are dropped.
pub fn runs_components(rf: &ResidualFrame) -> Result<RunsComponents> {
    let signs: Vec<bool> = sort_by_order(rf)
        .r
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    let n1 = signs.iter().filter(|s| **s).count();
    let n2 = signs.len() - n1;
    if n1 == 0 || n2 == 0 {
        return Err(AuditError::DegenerateRuns(format!(
            "{n1} positive and {n2} negative residuals; both signs are required"
        )));
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let expected = 2.0 * a * b / n + 1.0;
    let var = 2.0 * a * b * (2.0 * a * b - n) / (n * n * (n - 1.0));
    let sd = var.max(0.0).sqrt();
    if !(sd > 0.0) {
        return Err(AuditError::DegenerateRuns(
            "run-count standard deviation is zero".into(),
        ));
    }
    let runs = runs as f64;
    Ok(RunsComponents {
        runs,
        expected,
        sd,
        z: (runs - expected) / sd,
        positives: n1,
        negatives: n2,
    })
}

pub fn score_runs(rf: &ResidualFrame) -> Result<ScoreResult> {
    let c = runs_components(rf)?;
    Ok(ScoreResult::new("runs", &rf.label, c.z)
        .with("U", c.runs)
        .with("U_bar", c.expected)
        .with("s_U", c.sd)
        .with("Z", c.z))
}

/// True where `|r_i|` is at least every earlier `|r_j|`; index 0 always is.
pub fn peak_flags(abs: &[f64]) -> Vec<bool> {
    let mut running = f64::NEG_INFINITY;
    abs.iter()
        .map(|&v| {
            let peak = v >= running;
            running = running.max(v);
            peak
        })
        .collect()
}

/// Fraction of ordered observations whose absolute residual is a running maximum.
pub fn score_peak(rf: &ResidualFrame) -> ScoreResult {
    let abs: Vec<f64> = sort_by_order(rf).r.iter().map(|v| v.abs()).collect();
    let peaks = peak_flags(&abs).iter().filter(|p| **p).count();
    ScoreResult::new("peak", &rf.label, peaks as f64 / rf.n() as f64).with("peaks", peaks as f64)
}

/// Sample autocovariances and autocorrelations for lags `1..=L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSeries {
    pub label: String,
    pub lags: Vec<usize>,
    /// `gamma(0)`, excluded from `gamma`.
    pub gamma0: f64,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    /// Half-width of the `±1.96/√n` band.
    pub conf: f64,
}

/// Default maximum lag: `ceil(10 · log10(n))`, capped at `n - 1`.
pub fn default_max_lag(n: usize) -> usize {
    ((10.0 * (n as f64).log10()).ceil() as usize).clamp(1, n - 1)
}

/// Sample ACF with divisor `n` and the overall mean.
pub fn acf(rf: &ResidualFrame, max_lag: Option<usize>) -> Result<AcfSeries> {
    let n = rf.n();
    if n < 3 {
        return Err(AuditError::invalid("ACF needs at least 3 residuals"));
    }
    let lag_max = max_lag.unwrap_or_else(|| default_max_lag(n));
    if lag_max == 0 || lag_max > n - 1 {
        return Err(AuditError::invalid(format!(
            "max lag {lag_max} outside 1..={}",
            n - 1
        )));
    }
    let x = sort_by_order(rf).r;
    let m = mean(&x);
    let autocov =
        |t: usize| (0..n - t).map(|s| (x[s + t] - m) * (x[s] - m)).sum::<f64>() / n as f64;
    let gamma0 = autocov(0);
    if !(gamma0 > 0.0) {
        return Err(AuditError::UndefinedScore {
            score: "acf".into(),
            reason: "residual variance is zero".into(),
        });
    }
    let lags: Vec<usize> = (1..=lag_max).collect();
    let gamma: Vec<f64> = lags.iter().map(|&t| autocov(t)).collect();
    let rho = gamma.iter().map(|g| g / gamma0).collect();
    Ok(AcfSeries {
        label: rf.label.clone(),
        lags,
        gamma0,
        gamma,
        rho,
        conf: 1.96 / (n as f64).sqrt(),
    })
}

/// Area over the REC curve, integrated exactly from its step function.
pub fn score_rec(rf: &ResidualFrame) -> ScoreResult {
    let curve = curves::rec_curve(rf);
    let pts = &curve.points;
    let area: f64 = pts
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * (1.0 - w[0].y))
        .sum();
    ScoreResult::new("rec", &rf.label, area)
}

/// Area over the RROC curve by exact piecewise-linear integration.
pub fn score_rroc(rf: &ResidualFrame) -> Result<ScoreResult> {
    let curve = curves::rroc_curve(rf)?;
    Ok(ScoreResult::new(
        "rroc",
        &rf.label,
        curves::rroc_area(&curve),
    ))
}

/// Mann-Whitney AUC with half credit for ties, computed from mid-ranks.
pub fn score_auc(cf: &ClassificationFrame) -> ScoreResult {
    let mut order: Vec<usize> = (0..cf.n()).collect();
    order.sort_by(|&a, &b| cf.scores[a].partial_cmp(&cf.scores[b]).unwrap());
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && cf.scores[order[end + 1]] == cf.scores[order[k]] {
            end += 1;
        }
        // Mid-rank of positions k..=end (1-based ranks).
        let mid = (k + end + 2) as f64 / 2.0;
        rank_sum += mid * order[k..=end].iter().filter(|&&i| cf.labels[i]).count() as f64;
        k = end + 1;
    }
    let (p, n) = (cf.positives as f64, cf.negatives as f64);
    let auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
    ScoreResult::new("auc", &cf.label, auc)
}

/// Area under the precision-recall curve with right-continuous steps.
pub fn score_auprc(cf: &ClassificationFrame) -> ScoreResult {
    let p = cf.positives as f64;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for (_, fp, tp) in cf.threshold_counts() {
        let recall = tp as f64 / p;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ScoreResult::new("auprc", &cf.label, area)
}

/// Wraps a user scoring function; lower values must mean better models.
pub fn custom_score<F>(name: &str, rf: &ResidualFrame, score: F) -> Result<ScoreResult>
where
    F: Fn(&ResidualFrame) -> f64,
{
    let value = score(rf);
    if !value.is_finite() {
        return Err(AuditError::UndefinedScore {
            score: name.to_string(),
            reason: format!("custom function returned {value}"),
        });
    }
    Ok(ScoreResult::new(name, &rf.label, value))
}

/// One residual-based score by identifier. Classification and refit scores
/// are rejected here.
pub fn residual_score(id: ScoreId, rf: &ResidualFrame) -> Result<ScoreResult> {
    match id {
        ScoreId::Mae => Ok(score_mae(rf)),
        ScoreId::Mse => Ok(score_mse(rf)),
        ScoreId::Rmse => Ok(score_rmse(rf)),
        ScoreId::Rec => Ok(score_rec(rf)),
        ScoreId::Rroc => score_rroc(rf),
        ScoreId::Dw => score_dw(rf),
        ScoreId::Runs => score_runs(rf),
        ScoreId::Peak => Ok(score_peak(rf)),
        other => Err(AuditError::invalid(format!(
            "`{other}` is not computed from stored residuals"
        ))),
    }
}

/// Every residual-based score that is defined for `rf`, keyed by identifier.
pub fn residual_scores(rf: &ResidualFrame) -> BTreeMap<ScoreId, Result<ScoreResult>> {
    let mut out = BTreeMap::new();
    out.insert(ScoreId::Mae, Ok(score_mae(rf)));
    out.insert(ScoreId::Mse, Ok(score_mse(rf)));
    out.insert(ScoreId::Rmse, Ok(score_rmse(rf)));
    out.insert(ScoreId::Rec, Ok(score_rec(rf)));
    out.insert(ScoreId::Rroc, score_rroc(rf));
    out.insert(ScoreId::Dw, score_dw(rf));
    out.insert(ScoreId::Runs, score_runs(rf));
    out.insert(ScoreId::Peak, Ok(score_peak(rf)));
    out
}
