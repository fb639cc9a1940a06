//! In-memory data model shared by every diagnostic.
//!
//! An [`AuditFrame`] holds the observed response, one prediction vector per
//! model and any extra variables. Diagnostics never work on the frame
//! directly: they take a [`ResidualFrame`] (regression) or a
//! [`ClassificationFrame`] (binary labels) and produce [`CurveSeries`] plot
//! data or [`ScoreResult`] scalars.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Ordering axis: observed response.
pub const ORDER_Y: &str = "_y_";
/// Ordering axis: model predictions.
pub const ORDER_Y_HAT: &str = "_y_hat_";
/// Ordering axis: original observation index (0-based).
pub const ORDER_INDEX: &str = "_index_";

/// A variable column: numeric, or categorical stored verbatim as strings.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }

    /// Cell rendered as a group key.
    pub fn key(&self, i: usize) -> String {
        match self {
            Column::Numeric(v) => format!("{}", v[i]),
            Column::Categorical(v) => v[i].clone(),
        }
    }
}

/// Predictions of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPredictions {
    pub label: String,
    pub y_hat: Vec<f64>,
}

/// The single ingested dataset: response, per-model predictions and variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditFrame {
    y: Vec<f64>,
    models: Vec<ModelPredictions>,
    variables: Vec<(String, Column)>,
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(AuditError::invalid(format!(
            "column `{name}` has non-finite value {} at row {}",
            values[i],
            i + 1
        )));
    }
    Ok(())
}

impl AuditFrame {
    /// Validates and builds a frame. Variables keep their insertion order.
    pub fn new(
        y: Vec<f64>,
        models: Vec<ModelPredictions>,
        variables: Vec<(String, Column)>,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(AuditError::invalid("frame needs at least one observation"));
        }
        check_finite("y", &y)?;
        for (k, m) in models.iter().enumerate() {
            if m.label.is_empty() {
                return Err(AuditError::invalid("model labels must be non-empty"));
            }
            if models[..k].iter().any(|o| o.label == m.label) {
                return Err(AuditError::invalid(format!(
                    "duplicate model label `{}`",
                    m.label
                )));
            }
            if m.y_hat.len() != n {
                return Err(AuditError::DimensionMismatch(format!(
                    "model `{}` has {} predictions for {} observations",
                    m.label,
                    m.y_hat.len(),
                    n
                )));
            }
            check_finite(&m.label, &m.y_hat)?;
        }
        for (k, (name, col)) in variables.iter().enumerate() {
            if variables[..k].iter().any(|(o, _)| o == name) {
                return Err(AuditError::invalid(format!("duplicate variable `{name}`")));
            }
            if col.len() != n {
                return Err(AuditError::DimensionMismatch(format!(
                    "variable `{name}` has {} values for {} observations",
                    col.len(),
                    n
                )));
            }
        }
        Ok(AuditFrame {
            y,
            models,
            variables,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn models(&self) -> &[ModelPredictions] {
        &self.models
    }

    pub fn variables(&self) -> &[(String, Column)] {
        &self.variables
    }

    pub fn model(&self, label: &str) -> Result<&ModelPredictions> {
        self.models
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| AuditError::UnknownModel(label.to_string()))
    }

    pub fn variable(&self, name: &str) -> Option<&Column> {
        self.variables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
    }

    /// Numeric columns gathered row-wise into an `n × names.len()` design.
    pub fn design(&self, names: &[String]) -> Result<nalgebra::DMatrix<f64>> {
        let cols = names
            .iter()
            .map(|name| match self.variable(name) {
                Some(Column::Numeric(v)) => Ok(v.as_slice()),
                Some(Column::Categorical(_)) => Err(AuditError::CategoricalOrderKey(name.clone())),
                None => Err(AuditError::invalid(format!(
                    "unknown design column `{name}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(nalgebra::DMatrix::from_fn(self.n(), cols.len(), |i, j| {
            cols[j][i]
        }))
    }

    /// Copy of the frame keeping only the rows where `keep` is true.
    pub fn filter_rows(&self, keep: &[bool]) -> Result<AuditFrame> {
        if keep.len() != self.n() {
            return Err(AuditError::DimensionMismatch("row mask length".into()));
        }
        let pick = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(x, _)| *x)
                .collect()
        };
        let models = self
            .models
            .iter()
            .map(|m| ModelPredictions {
                label: m.label.clone(),
                y_hat: pick(&m.y_hat),
            })
            .collect();
        let variables = self
            .variables
            .iter()
            .map(|(name, col)| {
                let col = match col {
                    Column::Numeric(v) => Column::Numeric(pick(v)),
                    Column::Categorical(v) => Column::Categorical(
                        v.iter()
                            .zip(keep)
                            .filter(|(_, k)| **k)
                            .map(|(s, _)| s.clone())
                            .collect(),
                    ),
                };
                (name.clone(), col)
            })
            .collect();
        AuditFrame::new(pick(&self.y), models, variables)
    }

    /// Replaces (or appends) the predictions of a model.
    pub fn with_model(mut self, label: &str, y_hat: Vec<f64>) -> Result<AuditFrame> {
        self.models.retain(|m| m.label != label);
        self.models.push(ModelPredictions {
            label: label.to_string(),
            y_hat,
        });
        AuditFrame::new(self.y, self.models, self.variables)
    }
}

/// Residuals of one model together with the axis they are ordered by.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFrame {
    pub label: String,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub order_key: String,
    pub order_values: Vec<f64>,
    /// Original observation index of each row.
    pub index: Vec<usize>,
}

/// Builds the residual frame `r = y - y_hat` for `label`, ordered by `order_key`.
pub fn make_residual_frame(
    frame: &AuditFrame,
    label: &str,
    order_key: &str,
) -> Result<ResidualFrame> {
    let model = frame.model(label)?;
    let r: Vec<f64> = frame
        .y
        .iter()
        .zip(&model.y_hat)
        .map(|(y, f)| y - f)
        .collect();
    let order_values = match order_key {
        ORDER_Y => frame.y.clone(),
        ORDER_Y_HAT => model.y_hat.clone(),
        ORDER_INDEX => (0..frame.n()).map(|i| i as f64).collect(),
        name => match frame.variable(name) {
            Some(Column::Numeric(v)) => v.clone(),
            Some(Column::Categorical(_)) => {
                return Err(AuditError::CategoricalOrderKey(name.to_string()))
            }
            None => return Err(AuditError::UnknownOrderKey(name.to_string())),
        },
    };
    Ok(ResidualFrame {
        label: label.to_string(),
        r,
        y: frame.y.clone(),
        y_hat: model.y_hat.clone(),
        order_key: order_key.to_string(),
        order_values,
        index: (0..frame.n()).collect(),
    })
}

impl ResidualFrame {
    /// Frame built directly from residuals, ordered by index. `y` is set to
    /// the residuals and `y_hat` to zero so that `r = y - y_hat` holds.
    pub fn from_residuals(label: &str, r: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(AuditError::invalid("residual vector is empty"));
        }
        check_finite("residuals", &r)?;
        let n = r.len();
        Ok(ResidualFrame {
            label: label.to_string(),
            y: r.clone(),
            y_hat: vec![0.0; n],
            r,
            order_key: ORDER_INDEX.to_string(),
            order_values: (0..n).map(|i| i as f64).collect(),
            index: (0..n).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    fn permuted(&self, perm: &[usize]) -> ResidualFrame {
        let take = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        ResidualFrame {
            label: self.label.clone(),
            r: take(&self.r),
            y: take(&self.y),
            y_hat: take(&self.y_hat),
            order_key: self.order_key.clone(),
            order_values: take(&self.order_values),
            index: perm.iter().map(|&i| self.index[i]).collect(),
        }
    }
}

/// Permutation sorting `values` ascending, ties kept in input order.
pub fn sort_permutation(values: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    perm
}

/// Rows permuted into non-decreasing `order_values`; ties broken by the
/// original observation index.
pub fn sort_by_order(rf: &ResidualFrame) -> ResidualFrame {
    let mut perm: Vec<usize> = (0..rf.n()).collect();
    perm.sort_by(|&a, &b| {
        rf.order_values[a]
            .partial_cmp(&rf.order_values[b])
            .unwrap_or(Ordering::Equal)
            .then(rf.index[a].cmp(&rf.index[b]))
    });
    rf.permuted(&perm)
}

/// Binary labels with the model's scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationFrame {
    pub label: String,
    pub labels: Vec<bool>,
    pub scores: Vec<f64>,
    pub positives: usize,
    pub negatives: usize,
}

impl ClassificationFrame {
    /// `labels` must be exactly 0 or 1. Both classes must be present.
    pub fn new(label: &str, labels: &[f64], scores: Vec<f64>) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(AuditError::DimensionMismatch(format!(
                "{} labels for {} scores",
                labels.len(),
                scores.len()
            )));
        }
        check_finite("scores", &scores)?;
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 1.0 {
                    Ok(true)
                } else if v == 0.0 {
                    Ok(false)
                } else {
                    Err(AuditError::invalid(format!(
                        "label {v} at row {} is not binary (0/1)",
                        i + 1
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let positives = labels.iter().filter(|l| **l).count();
        let negatives = labels.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(AuditError::SingleClass {
                positives,
                negatives,
            });
        }
        Ok(ClassificationFrame {
            label: label.to_string(),
            labels,
            scores,
            positives,
            negatives,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Cumulative (FP, TP) counts after admitting each group of tied scores,
    /// scanning thresholds from the highest score down. Returns
    /// `(threshold, fp, tp)` per unique score.
    pub fn threshold_counts(&self) -> Vec<(f64, usize, usize)> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| {
            self.scores[b]
                .partial_cmp(&self.scores[a])
                .unwrap_or(Ordering::Equal)
        });
        let mut out = Vec::new();
        let (mut fp, mut tp) = (0, 0);
        let mut k = 0;
        while k < order.len() {
            let t = self.scores[order[k]];
            while k < order.len() && self.scores[order[k]] == t {
                if self.labels[order[k]] {
                    tp += 1;
                } else {
                    fp += 1;
                }
                k += 1;
            }
            out.push((t, fp, tp));
        }
        out
    }
}

/// Plot types, serialized with their `plot --type` identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Acf,
    Autocorrelation,
    #[serde(rename = "cooksdistance")]
    CooksDistance,
    Correlation,
    #[serde(rename = "halfnormal")]
    HalfNormal,
    Lift,
    Pca,
    Performance,
    Radar,
    Rec,
    Residual,
    ResidualBoxplot,
    ResidualDensity,
    Roc,
    Prc,
    Rroc,
    #[serde(rename = "scalelocation")]
    ScaleLocation,
    Tsecdf,
}

impl CurveKind {
    pub const ALL: [CurveKind; 18] = [
        CurveKind::Acf,
        CurveKind::Autocorrelation,
        CurveKind::CooksDistance,
        CurveKind::Correlation,
        CurveKind::HalfNormal,
        CurveKind::Lift,
        CurveKind::Pca,
        CurveKind::Performance,
        CurveKind::Radar,
        CurveKind::Rec,
        CurveKind::Residual,
        CurveKind::ResidualBoxplot,
        CurveKind::ResidualDensity,
        CurveKind::Roc,
        CurveKind::Prc,
        CurveKind::Rroc,
        CurveKind::ScaleLocation,
        CurveKind::Tsecdf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CurveKind::Acf => "acf",
            CurveKind::Autocorrelation => "autocorrelation",
            CurveKind::CooksDistance => "cooksdistance",
            CurveKind::Correlation => "correlation",
            CurveKind::HalfNormal => "halfnormal",
            CurveKind::Lift => "lift",
            CurveKind::Pca => "pca",
            CurveKind::Performance => "performance",
            CurveKind::Radar => "radar",
            CurveKind::Rec => "rec",
            CurveKind::Residual => "residual",
            CurveKind::ResidualBoxplot => "residual_boxplot",
            CurveKind::ResidualDensity => "residual_density",
            CurveKind::Roc => "roc",
            CurveKind::Prc => "prc",
            CurveKind::Rroc => "rroc",
            CurveKind::ScaleLocation => "scalelocation",
            CurveKind::Tsecdf => "tsecdf",
        }
    }

    pub fn from_id(id: &str) -> Option<CurveKind> {
        // "prediction" is accepted as an alias of the predicted-response plot.
        if id == "prediction" {
            return Some(CurveKind::Performance);
        }
        CurveKind::ALL.iter().copied().find(|k| k.id() == id)
    }

    /// Kinds whose x coordinate never decreases along the curve.
    pub fn is_monotone(self) -> bool {
        matches!(
            self,
            CurveKind::Roc | CurveKind::Rec | CurveKind::Lift | CurveKind::Tsecdf | CurveKind::Rroc
        )
    }

    /// Kinds that need binary labels.
    pub fn is_classification(self) -> bool {
        matches!(self, CurveKind::Roc | CurveKind::Lift | CurveKind::Prc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "crate::serde_float")]
    pub x: f64,
    #[serde(with = "crate::serde_float")]
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Generic `(x, y)` polyline with metadata: the plot-data product.
///
/// `aux` vectors are aligned with `points`; `extra` holds unaligned
/// companions such as rug values or reference constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub kind: CurveKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub points: Vec<Point>,
    #[serde(
        default,
        skip_serializing_if = "BTreeMap::is_empty",
        with = "crate::serde_float::map"
    )]
    pub aux: BTreeMap<String, Vec<f64>>,
    #[serde(
        default,
        skip_serializing_if = "BTreeMap::is_empty",
        with = "crate::serde_float::map"
    )]
    pub extra: BTreeMap<String, Vec<f64>>,
}

impl CurveSeries {
    pub fn new(kind: CurveKind, label: impl Into<String>, points: Vec<Point>) -> Self {
        CurveSeries {
            kind,
            label: label.into(),
            group: None,
            points,
            aux: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_aux(mut self, name: &str, values: Vec<f64>) -> Self {
        self.aux.insert(name.to_string(), values);
        self
    }

    pub fn with_extra(mut self, name: &str, values: Vec<f64>) -> Self {
        self.extra.insert(name.to_string(), values);
        self
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    /// Checks the series invariants: non-empty finite points, aligned aux
    /// vectors and non-decreasing x for monotone kinds.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(AuditError::invalid(format!(
                "{} series `{}` is empty",
                self.kind.id(),
                self.label
            )));
        }
        if self
            .points
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(AuditError::invalid("series has non-finite points"));
        }
        if let Some((name, _)) = self.aux.iter().find(|(_, v)| v.len() != self.points.len()) {
            return Err(AuditError::invalid(format!(
                "aux `{name}` not aligned with points"
            )));
        }
        if self.kind.is_monotone() && self.points.windows(2).any(|w| w[1].x < w[0].x) {
            return Err(AuditError::invalid(format!(
                "{} series x is decreasing",
                self.kind.id()
            )));
        }
        Ok(())
    }
}

/// A named scalar diagnostic with its intermediate components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub name: String,
    pub label: String,
    #[serde(with = "crate::serde_float")]
    pub value: f64,
    #[serde(
        default,
        skip_serializing_if = "BTreeMap::is_empty",
        with = "crate::serde_float::scalar_map"
    )]
    pub components: BTreeMap<String, f64>,
}

impl ScoreResult {
    pub fn new(name: &str, label: &str, value: f64) -> Self {
        ScoreResult {
            name: name.into(),
            label: label.into(),
            value,
            components: BTreeMap::new(),
        }
    }

    pub fn with(mut self, component: &str, value: f64) -> Self {
        self.components.insert(component.to_string(), value);
        self
    }
}
