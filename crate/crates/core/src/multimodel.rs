//! Cross-model comparison: residual PCA, correlation grid and ranking.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{CurveKind, CurveSeries, Point, ResidualFrame};
use crate::error::{AuditError, Result};
use crate::numerics::stats::{mean, pearson, variance_sample};
use crate::numerics::{kde_gaussian, linspace, sym_eigen_2pc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBiplot {
    pub labels: Vec<String>,
    /// `n × 2` observation coordinates, row-wise.
    pub scores: Vec<[f64; 2]>,
    /// `k × 2` model arrows, row-wise.
    pub loadings: Vec<[f64; 2]>,
    pub explained: [f64; 2],
    pub eigenvalues: [f64; 2],
    pub trace: f64,
}

/// Biplot of the first two principal components of the `n × k` matrix of
/// centered residuals.
pub fn model_pca(frames: &[ResidualFrame]) -> Result<PcaBiplot> {
    let k = frames.len();
    if k < 2 {
        return Err(AuditError::invalid("PCA needs at least 2 models"));
    }
    let n = frames[0].n();
    if frames.iter().any(|f| f.n() != n) {
        return Err(AuditError::DimensionMismatch(
            "residual vectors of different lengths".into(),
        ));
    }
    if n < 2 {
        return Err(AuditError::invalid("PCA needs at least 2 observations"));
    }
    for f in frames {
        if !(variance_sample(&f.r) > 0.0) {
            return Err(AuditError::invalid(format!(
                "residuals of `{}` have zero variance",
                f.label
            )));
        }
    }
    let means: Vec<f64> = frames.iter().map(|f| mean(&f.r)).collect();
    let centered = DMatrix::from_fn(n, k, |i, j| frames[j].r[i] - means[j]);
    let cov = (centered.transpose() * &centered) / (n - 1) as f64;
    // Exact symmetry for the eigen solver.
    let cov = DMatrix::from_fn(k, k, |i, j| if i <= j { cov[(i, j)] } else { cov[(j, i)] });
    let trace = cov.trace();
    let [a, b] = sym_eigen_2pc(&cov)?;
    let lambda = [a.value.max(0.0), b.value.max(0.0)];
    let scores = (0..n)
        .map(|i| {
            let dot = |v: &[f64]| (0..k).map(|j| centered[(i, j)] * v[j]).sum::<f64>();
            [dot(&a.vector), dot(&b.vector)]
        })
        .collect();
    let loadings = (0..k)
        .map(|j| {
            [
                a.vector[j] * lambda[0].sqrt(),
                b.vector[j] * lambda[1].sqrt(),
            ]
        })
        .collect();
    Ok(PcaBiplot {
        labels: frames.iter().map(|f| f.label.clone()).collect(),
        scores,
        loadings,
        explained: [lambda[0] / trace, lambda[1] / trace],
        eigenvalues: lambda,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid {
    /// `"y"` followed by the model labels.
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    /// Diagonal densities, one per variable.
    pub densities: Vec<CurveSeries>,
    /// Off-diagonal scatter for each pair `i < j`, grouped as `"<i>|<j>"`.
    pub scatter: Vec<CurveSeries>,
}

const CORRELATION_DENSITY_POINTS: usize = 128;

/// Pearson correlations among the observed response and all predictions.
pub fn model_correlation(y: &[f64], frames: &[ResidualFrame]) -> Result<CorrelationGrid> {
    if frames.is_empty() {
        return Err(AuditError::invalid(
            "correlation grid needs at least one model",
        ));
    }
    let mut labels = vec!["y".to_string()];
    let mut cols: Vec<&[f64]> = vec![y];
    for f in frames {
        if f.n() != y.len() {
            return Err(AuditError::DimensionMismatch(format!(
                "model `{}` length",
                f.label
            )));
        }
        labels.push(f.label.clone());
        cols.push(&f.y_hat);
    }
    for (l, c) in labels.iter().zip(&cols) {
        if !(c.len() > 1 && variance_sample(c) > 0.0) {
            return Err(AuditError::invalid(format!("`{l}` has zero variance")));
        }
    }
    let k = cols.len();
    let mut matrix = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson(cols[i], cols[j]).clamp(-1.0, 1.0);
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    let mut densities = Vec::with_capacity(k);
    for (l, c) in labels.iter().zip(&cols) {
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = linspace(lo, hi, CORRELATION_DENSITY_POINTS);
        let d = kde_gaussian(c, &grid)?;
        densities.push(CurveSeries::new(
            CurveKind::Correlation,
            l.as_str(),
            grid.iter()
                .zip(&d)
                .map(|(&x, &y)| Point::new(x, y))
                .collect(),
        ));
    }
    let mut scatter = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let mut s = CurveSeries::new(
                CurveKind::Correlation,
                format!("{} vs {}", labels[j], labels[i]),
                cols[i]
                    .iter()
                    .zip(cols[j])
                    .map(|(&x, &y)| Point::new(x, y))
                    .collect(),
            );
            s.group = Some(format!("{i}|{j}"));
            scatter.push(s);
        }
    }
    Ok(CorrelationGrid {
        labels,
        matrix,
        densities,
        scatter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub label: String,
    pub score: String,
    pub raw: f64,
    pub invscore: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub reference_label: String,
    pub entries: Vec<RankingEntry>,
}

impl RankingTable {
    pub fn get(&self, label: &str, score: &str) -> Option<&RankingEntry> {
        self.entries
            .iter()
            .find(|e| e.label == label && e.score == score)
    }
}

/// Raw scores keyed by score name, then model label.
pub type RawScores = BTreeMap<String, BTreeMap<String, f64>>;

/// `invscore = min_j score_j / score_i` and `scaled = score_ref / score_i`.
pub fn ranking(raw: &RawScores, reference: &str) -> Result<RankingTable> {
    if raw.is_empty() {
        return Err(AuditError::invalid("ranking needs at least one score"));
    }
    let mut entries = Vec::new();
    for (score, per_model) in raw {
        if per_model.is_empty() {
            return Err(AuditError::invalid(format!(
                "no models scored for `{score}`"
            )));
        }
        if let Some((l, v)) = per_model
            .iter()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(AuditError::UndefinedScore {
                score: score.clone(),
                reason: format!(
                    "model `{l}` has non-positive or non-finite value {v}; invscore undefined"
                ),
            });
        }
        let best = per_model.values().copied().fold(f64::INFINITY, f64::min);
        let ref_value = *per_model
            .get(reference)
            .ok_or_else(|| AuditError::UnknownModel(reference.to_string()))?;
        for (label, &v) in per_model {
            // The minimizer gets exactly 1, not best / best rounded.
            let invscore = if v == best { 1.0 } else { best / v };
            let scaled = if label == reference {
                1.0
            } else {
                ref_value / v
            };
            entries.push(RankingEntry {
                label: label.clone(),
                score: score.clone(),
                raw: v,
                invscore,
                scaled,
            });
        }
    }
    Ok(RankingTable {
        reference_label: reference.to_string(),
        entries,
    })
}

/// Radar polygons: one series per model with `x` the score position and `y`
/// the invscore; score names go to `aux`-free metadata via the order given.
pub fn radar_series(table: &RankingTable, score_order: &[String]) -> Vec<CurveSeries> {
    let mut labels: Vec<&str> = Vec::new();
    for e in &table.entries {
        if !labels.contains(&e.label.as_str()) {
            labels.push(&e.label);
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let points = score_order
                .iter()
                .enumerate()
                .filter_map(|(k, s)| {
                    table
                        .get(label, s)
                        .map(|e| Point::new(k as f64, e.invscore))
                })
                .collect();
            let scaled = score_order
                .iter()
                .filter_map(|s| table.get(label, s).map(|e| e.scaled))
                .collect();
            CurveSeries::new(CurveKind::Radar, label, points).with_aux("scaled", scaled)
        })
        .collect()
}
