//! Plot data for every plot type, as [`CurveSeries`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{
    sort_by_order, ClassificationFrame, Column, CurveKind, CurveSeries, Point, ResidualFrame,
};
use crate::error::{AuditError, Result};
use crate::numerics::stats::{ecdf, quantile_sorted, sorted, variance_sample};
use crate::numerics::{kde_with_bandwidth, linspace, lowess, silverman_bandwidth, DEFAULT_SPAN};
use crate::scores::{peak_flags, AcfSeries};

/// Number of grid points of a residual density curve.
pub const DENSITY_GRID_POINTS: usize = 512;

fn index_aux(rf: &ResidualFrame) -> Vec<f64> {
    rf.index.iter().map(|&i| i as f64).collect()
}

/// Residuals against the ordering axis, sorted by it.
pub fn residual_scatter(rf: &ResidualFrame) -> CurveSeries {
    let s = sort_by_order(rf);
    let points = s
        .order_values
        .iter()
        .zip(&s.r)
        .map(|(&x, &y)| Point::new(x, y))
        .collect();
    CurveSeries::new(CurveKind::Residual, &rf.label, points).with_aux("index", index_aux(&s))
}

/// Box-and-whisker summary of the absolute residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub label: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
    pub rmse_marker: f64,
}

pub fn residual_boxplot(rf: &ResidualFrame) -> BoxplotStats {
    let abs = sorted(&rf.r.iter().map(|r| r.abs()).collect::<Vec<_>>());
    let q1 = quantile_sorted(&abs, 0.25);
    let median = quantile_sorted(&abs, 0.5);
    let q3 = quantile_sorted(&abs, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = abs
        .iter()
        .copied()
        .filter(|v| *v >= lo_fence && *v <= hi_fence)
        .collect();
    let rmse = (rf.r.iter().map(|r| r * r).sum::<f64>() / rf.n() as f64).sqrt();
    BoxplotStats {
        label: rf.label.clone(),
        q1,
        median,
        q3,
        whisker_lo: inside.first().copied().unwrap_or(q1),
        whisker_hi: inside.last().copied().unwrap_or(q3),
        outliers: abs
            .iter()
            .copied()
            .filter(|v| *v < lo_fence || *v > hi_fence)
            .collect(),
        rmse_marker: rmse,
    }
}

/// Lag-1 scatter `(r_i, r_{i+1})` of the ordered residuals.
pub fn autocorrelation_scatter(rf: &ResidualFrame) -> Result<CurveSeries> {
    if rf.n() < 2 {
        return Err(AuditError::invalid(
            "autocorrelation plot needs at least 2 residuals",
        ));
    }
    let s = sort_by_order(rf);
    let points = s.r.windows(2).map(|w| Point::new(w[0], w[1])).collect();
    let index = s.index[..s.n() - 1].iter().map(|&i| i as f64).collect();
    Ok(CurveSeries::new(CurveKind::Autocorrelation, &rf.label, points).with_aux("index", index))
}

/// ACF values as a plot series; the confidence half-width goes to `extra["conf"]`.
pub fn acf_curve(series: &AcfSeries) -> CurveSeries {
    let points = series
        .lags
        .iter()
        .zip(&series.rho)
        .map(|(&l, &r)| Point::new(l as f64, r))
        .collect();
    CurveSeries::new(CurveKind::Acf, &series.label, points).with_extra("conf", vec![series.conf])
}

/// Residuals divided by their sample standard deviation (divisor `n - 1`).
pub fn standardized_residuals(r: &[f64]) -> Result<Vec<f64>> {
    if r.len() < 2 {
        return Err(AuditError::invalid(
            "standardized residuals need at least 2 values",
        ));
    }
    let sd = variance_sample(r).sqrt();
    if !(sd > 0.0) {
        return Err(AuditError::invalid("residual standard deviation is zero"));
    }
    Ok(r.iter().map(|v| v / sd).collect())
}

/// Scale-location points with their conditional-mean smoother.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleLocation {
    /// `(order value, sqrt|r_std|)`; `aux["peak"]` is 1 for running-max peaks.
    pub points: CurveSeries,
    pub smooth: CurveSeries,
}

pub fn scale_location(rf: &ResidualFrame) -> Result<ScaleLocation> {
    if rf.n() < 3 {
        return Err(AuditError::invalid(
            "scale-location plot needs at least 3 residuals",
        ));
    }
    let s = sort_by_order(rf);
    let std = standardized_residuals(&s.r)?;
    let y: Vec<f64> = std.iter().map(|v| v.abs().sqrt()).collect();
    let abs: Vec<f64> = s.r.iter().map(|v| v.abs()).collect();
    let peaks = peak_flags(&abs)
        .iter()
        .map(|p| if *p { 1.0 } else { 0.0 })
        .collect();
    let points = s
        .order_values
        .iter()
        .zip(&y)
        .map(|(&x, &y)| Point::new(x, y))
        .collect();
    let smoothed = lowess(&s.order_values, &y, DEFAULT_SPAN)?;
    let smooth_points = s
        .order_values
        .iter()
        .zip(&smoothed)
        .map(|(&x, &y)| Point::new(x, y))
        .collect();
    let mut smooth = CurveSeries::new(CurveKind::ScaleLocation, &rf.label, smooth_points);
    smooth.group = Some("smooth".into());
    Ok(ScaleLocation {
        points: CurveSeries::new(CurveKind::ScaleLocation, &rf.label, points)
            .with_aux("peak", peaks)
            .with_aux("index", index_aux(&s)),
        smooth,
    })
}

/// Density curves plus the groups that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOutput {
    pub series: Vec<CurveSeries>,
    pub warnings: Vec<String>,
}

fn density_series(label: &str, values: &[f64]) -> Result<CurveSeries> {
    let bw = silverman_bandwidth(values)?;
    let s = sorted(values);
    let grid = linspace(
        s[0] - 3.0 * bw,
        s[s.len() - 1] + 3.0 * bw,
        DENSITY_GRID_POINTS,
    );
    let dens = kde_with_bandwidth(values, &grid, bw);
    let points = grid
        .iter()
        .zip(&dens)
        .map(|(&x, &y)| Point::new(x, y))
        .collect();
    Ok(CurveSeries::new(CurveKind::ResidualDensity, label, points)
        .with_extra("rug", values.to_vec())
        .with_extra("bandwidth", vec![bw]))
}

/// Residual KDE, optionally one curve per level of `group_by` (a column
/// aligned with the original observations).
pub fn residual_density(rf: &ResidualFrame, group_by: Option<&Column>) -> Result<DensityOutput> {
    let Some(col) = group_by else {
        return Ok(DensityOutput {
            series: vec![density_series(&rf.label, &rf.r)?],
            warnings: vec![],
        });
    };
    if col.len() != rf.index.iter().max().map_or(0, |m| m + 1).max(rf.n()) {
        return Err(AuditError::DimensionMismatch(
            "grouping column length".into(),
        ));
    }
    // Group order: ascending numeric level, or lexicographic for categories.
    let mut groups: Vec<(String, Option<f64>, Vec<f64>)> = Vec::new();
    for (row, &obs) in rf.index.iter().enumerate() {
        let key = col.key(obs);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.2.push(rf.r[row]),
            None => groups.push((key, col.as_numeric().map(|v| v[obs]), vec![rf.r[row]])),
        }
    }
    groups.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
        _ => a.0.cmp(&b.0),
    });
    let mut out = DensityOutput {
        series: vec![],
        warnings: vec![],
    };
    if groups.len() == 1 {
        out.series.push(density_series(&rf.label, &rf.r)?);
        return Ok(out);
    }
    for (key, _, values) in groups {
        match density_series(&rf.label, &values) {
            Ok(mut s) => {
                s.group = Some(key);
                out.series.push(s);
            }
            Err(e) => out
                .warnings
                .push(format!("model `{}`, group `{key}` skipped: {e}", rf.label)),
        }
    }
    Ok(out)
}

/// Normalized ECDF curves of negative and non-negative residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedEcdf {
    pub negative: Option<CurveSeries>,
    pub positive: Option<CurveSeries>,
}

/// Positive side: `n_P/n · F_P(t)` at each non-negative residual (zeros
/// count as positive). Negative side: `(1 - n_P/n) · (1 - F_N(t⁻))`, the
/// share of negative residuals at or below `t` in magnitude order, so both
/// outer ends together reach exactly 1.
pub fn tsecdf(rf: &ResidualFrame) -> Result<TwoSidedEcdf> {
    if rf.r.iter().all(|v| *v == 0.0) {
        return Err(AuditError::invalid(
            "two-sided ECDF needs at least one nonzero residual",
        ));
    }
    let n = rf.n() as f64;
    let pos: Vec<f64> = rf.r.iter().copied().filter(|v| *v >= 0.0).collect();
    let neg: Vec<f64> = rf.r.iter().copied().filter(|v| *v < 0.0).collect();
    let pos_scale = pos.len() as f64 / n;
    let neg_scale = 1.0 - pos_scale;

    let positive = (!pos.is_empty()).then(|| {
        let f = ecdf(&pos);
        let points = f
            .values
            .iter()
            .zip(&f.cumulative)
            .map(|(&x, &c)| Point::new(x, pos_scale * c))
            .collect();
        let mut s = CurveSeries::new(CurveKind::Tsecdf, &rf.label, points);
        s.group = Some("positive".into());
        s
    });
    let negative = (!neg.is_empty()).then(|| {
        let f = ecdf(&neg);
        let mut below = 0.0;
        let points = f
            .values
            .iter()
            .zip(&f.cumulative)
            .map(|(&x, &c)| {
                // Share of negatives >= x is 1 - F(x⁻).
                let share = 1.0 - below;
                below = c;
                Point::new(x, neg_scale * share)
            })
            .collect();
        let mut s = CurveSeries::new(CurveKind::Tsecdf, &rf.label, points);
        s.group = Some("negative".into());
        s
    });
    Ok(TwoSidedEcdf { negative, positive })
}

/// Accuracy within tolerance `ε` at every distinct absolute residual,
/// starting from `(0, acc(0))`.
pub fn rec_curve(rf: &ResidualFrame) -> CurveSeries {
    let abs: Vec<f64> = rf.r.iter().map(|v| v.abs()).collect();
    let f = ecdf(&abs);
    let mut points = Vec::with_capacity(f.values.len() + 1);
    if f.values[0] > 0.0 {
        points.push(Point::new(0.0, 0.0));
    }
    points.extend(
        f.values
            .iter()
            .zip(&f.cumulative)
            .map(|(&x, &y)| Point::new(x, y)),
    );
    CurveSeries::new(CurveKind::Rec, &rf.label, points)
}

/// RROC vertices `(OVER(s), UNDER(s))` with `OVER(s) = Σ max(s - r_i, 0)` and
/// `UNDER(s) = Σ min(s - r_i, 0)`, at every residual value and at `s = 0`.
/// `aux["shift"]` holds `s`; the point with shift 0 is the model as fitted.
pub fn rroc_curve(rf: &ResidualFrame) -> Result<CurveSeries> {
    let n = rf.n();
    if n < 2 {
        return Err(AuditError::invalid("RROC curve needs at least 2 residuals"));
    }
    let r = sorted(&rf.r);
    let mut shifts: Vec<f64> = r.clone();
    shifts.push(0.0);
    let shifts = sorted(&shifts);
    let mut uniq: Vec<f64> = Vec::with_capacity(shifts.len());
    for s in shifts {
        if uniq.last() != Some(&s) {
            uniq.push(s);
        }
    }
    let total: f64 = r.iter().sum();
    let mut prefix = 0.0;
    let mut k = 0;
    let mut points = Vec::with_capacity(uniq.len());
    for &s in &uniq {
        while k < n && r[k] <= s {
            prefix += r[k];
            k += 1;
        }
        let over = k as f64 * s - prefix;
        let under = (n - k) as f64 * s - (total - prefix);
        points.push(Point::new(over.max(0.0), under.min(0.0)));
    }
    Ok(CurveSeries::new(CurveKind::Rroc, &rf.label, points).with_aux("shift", uniq))
}

/// Area between an RROC curve and the axes' corner `(0, 0)`.
pub fn rroc_area(curve: &CurveSeries) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * -(w[0].y + w[1].y) / 2.0)
        .sum()
}

/// Trapezoidal area under a curve.
pub fn trapezoid_area(curve: &CurveSeries) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) / 2.0)
        .sum()
}

/// ROC vertices from `(0, 0)` to `(1, 1)`, one per distinct score;
/// `aux["threshold"]` starts with the `+inf` sentinel.
pub fn roc_curve(cf: &ClassificationFrame) -> CurveSeries {
    let (p, n) = (cf.positives as f64, cf.negatives as f64);
    let counts = cf.threshold_counts();
    let mut points = vec![Point::new(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    for (t, fp, tp) in counts {
        points.push(Point::new(fp as f64 / n, tp as f64 / p));
        thresholds.push(t);
    }
    CurveSeries::new(CurveKind::Roc, &cf.label, points).with_aux("threshold", thresholds)
}

/// LIFT chart with its ideal and random reference curves.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftChart {
    pub model: CurveSeries,
    pub ideal: CurveSeries,
    pub random: CurveSeries,
}

/// True positives against the rate of positive predictions.
pub fn lift_chart(cf: &ClassificationFrame) -> LiftChart {
    let total = cf.n() as f64;
    let p = cf.positives as f64;
    let mut points = vec![Point::new(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    for (t, fp, tp) in cf.threshold_counts() {
        points.push(Point::new((fp + tp) as f64 / total, tp as f64));
        thresholds.push(t);
    }
    let mut ideal = CurveSeries::new(
        CurveKind::Lift,
        "ideal",
        vec![
            Point::new(0.0, 0.0),
            Point::new(p / total, p),
            Point::new(1.0, p),
        ],
    );
    ideal.group = Some("reference".into());
    let mut random = CurveSeries::new(
        CurveKind::Lift,
        "random",
        vec![Point::new(0.0, 0.0), Point::new(1.0, p)],
    );
    random.group = Some("reference".into());
    LiftChart {
        model: CurveSeries::new(CurveKind::Lift, &cf.label, points)
            .with_aux("threshold", thresholds),
        ideal,
        random,
    }
}

/// Precision against recall over descending thresholds, stopping once full
/// recall is reached. The recall-0 point reuses the precision of the
/// highest-score threshold.
pub fn prc_curve(cf: &ClassificationFrame) -> CurveSeries {
    let p = cf.positives as f64;
    let mut points = Vec::new();
    let mut thresholds = Vec::new();
    for (t, fp, tp) in cf.threshold_counts() {
        let precision = tp as f64 / (tp + fp) as f64;
        if points.is_empty() {
            points.push(Point::new(0.0, precision));
            thresholds.push(f64::INFINITY);
        }
        points.push(Point::new(tp as f64 / p, precision));
        thresholds.push(t);
        if tp == cf.positives {
            break;
        }
    }
    CurveSeries::new(CurveKind::Prc, &cf.label, points).with_aux("threshold", thresholds)
}

/// Predictions against the ordering axis (normally the observed response),
/// with `aux["diagonal"]` the identity reference and an optional smoother.
pub fn predicted_response(
    rf: &ResidualFrame,
    smooth: bool,
) -> Result<(CurveSeries, Option<CurveSeries>)> {
    let s = sort_by_order(rf);
    let points = s
        .order_values
        .iter()
        .zip(&s.y_hat)
        .map(|(&x, &y)| Point::new(x, y))
        .collect();
    let series = CurveSeries::new(CurveKind::Performance, &rf.label, points)
        .with_aux("diagonal", s.order_values.clone())
        .with_aux("index", index_aux(&s));
    let smoother = if smooth {
        let fitted = lowess(&s.order_values, &s.y_hat, DEFAULT_SPAN)?;
        let pts = s
            .order_values
            .iter()
            .zip(&fitted)
            .map(|(&x, &y)| Point::new(x, y))
            .collect();
        let mut c = CurveSeries::new(CurveKind::Performance, &rf.label, pts);
        c.group = Some("smooth".into());
        Some(c)
    } else {
        None
    };
    Ok((series, smoother))
}

/// Count of observations per group key, for metadata.
pub fn group_sizes(col: &Column) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for i in 0..col.len() {
        *m.entry(col.key(i)).or_insert(0) += 1;
    }
    m
}
