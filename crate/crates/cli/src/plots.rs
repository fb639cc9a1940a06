//! Plot-data assembly for every plot type over all models of a dataset.


use resaudit_core::curves::{
    acf_curve, autocorrelation_scatter, lift_chart, prc_curve, predicted_response, rec_curve,
    residual_boxplot, residual_density, residual_scatter, roc_curve, rroc_curve, scale_location,
    tsecdf,
};
use resaudit_core::data::{
    make_residual_frame, ClassificationFrame, CurveKind, CurveSeries, Point, ResidualFrame,
    ScoreResult, ORDER_INDEX, ORDER_Y, ORDER_Y_HAT,
};
use resaudit_core::influence::{
    cooks_distance, halfnormal, score_halfnormal, CooksOptions, CooksResult, HalfNormalOptions,
    HalfNormalResult,
};
use resaudit_core::models::ModelHandle;
use resaudit_core::multimodel::{model_correlation, model_pca, radar_series, ranking, RawScores};
use resaudit_core::numerics::Matrix;
use resaudit_core::scores::{acf, residual_score, ScoreId};

use crate::document::Payload;
use crate::error::{usage, CliResult};
use crate::ingest::Dataset;

pub const DEFAULT_RADAR_SCORES: [ScoreId; 4] =
    [ScoreId::Mae, ScoreId::Mse, ScoreId::Rec, ScoreId::Rroc];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotOptions {
    /// Ordering axis; defaults per plot type.
    pub variable: Option<String>,
    pub group: Option<String>,
    pub max_lag: Option<usize>,
    pub smooth: bool,
    /// Reference model for the radar `scaled` values; defaults to the first.
    pub reference: Option<String>,
    pub radar_scores: Vec<ScoreId>,
}

/// A model to refit and the design columns it is fitted on.
#[derive(Debug, Clone)]
pub struct RefitSpec {
    pub handle: ModelHandle,
    pub design: Vec<String>,
    pub cooks: CooksOptions,
    pub halfnormal: HalfNormalOptions,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotOutput {
    pub series: Vec<CurveSeries>,
    pub payload: Option<Payload>,
    pub warnings: Vec<String>,
}

/// Default ordering: the observed response for the prediction plot, fitted
/// values otherwise.
pub fn default_variable(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Performance => ORDER_Y,
        _ => ORDER_Y_HAT,
    }
}

fn residual_frames(ds: &Dataset, key: &str) -> CliResult<Vec<ResidualFrame>> {
    if ds.frame.models().is_empty() {
        return Err(usage(format!(
            "dataset has no `{}<label>` prediction columns",
            crate::ingest::MODEL_PREFIX
        )));
    }
    Ok(ds
        .frame
        .models()
        .iter()
        .map(|m| make_residual_frame(&ds.frame, &m.label, key))
        .collect::<Result<_, _>>()?)
}

fn classification_frames(ds: &Dataset, kind: &str) -> CliResult<Vec<ClassificationFrame>> {
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| usage(format!("`{kind}` needs binary labels; pass --label-column")))?;
    if ds.frame.models().is_empty() {
        return Err(usage("dataset has no prediction columns"));
    }
    Ok(ds
        .frame
        .models()
        .iter()
        .map(|m| ClassificationFrame::new(&m.label, labels, m.y_hat.clone()))
        .collect::<Result<_, _>>()?)
}

fn grouped(mut s: CurveSeries, group: &str) -> CurveSeries {
    s.group = Some(group.into());
    s
}

pub fn design_and_response(ds: &Dataset, spec: &RefitSpec) -> CliResult<(Matrix, Vec<f64>)> {
    Ok((ds.frame.design(&spec.design)?, ds.frame.y().to_vec()))
}

pub fn run_cooks(ds: &Dataset, spec: &RefitSpec) -> CliResult<(CooksResult, Vec<String>)> {
    let (x, y) = design_and_response(ds, spec)?;
    let mut opts = spec.cooks.clone();
    let mut warnings = Vec::new();
    if opts.top_k > y.len() {
        warnings.push(format!(
            "top-k {} exceeds {} observations; clamped",
            opts.top_k,
            y.len()
        ));
        opts.top_k = y.len();
    }
    let result = cooks_distance(&spec.handle, &x, &y, &opts)?;
    warnings.extend(result.warnings.iter().cloned());
    Ok((result, warnings))
}

pub fn run_halfnormal(ds: &Dataset, spec: &RefitSpec) -> CliResult<HalfNormalResult> {
    let (x, y) = design_and_response(ds, spec)?;
    Ok(halfnormal(&spec.handle, &x, &y, &spec.halfnormal)?)
}

pub fn cooks_series(label: &str, r: &CooksResult) -> CurveSeries {
    let points =
        r.d.iter()
            .enumerate()
            .map(|(i, &d)| Point::new(i as f64, d))
            .collect();
    CurveSeries::new(CurveKind::CooksDistance, label, points)
        .with_extra("top_k", r.top_k.iter().map(|&i| i as f64).collect())
}

pub fn halfnormal_series(label: &str, r: &HalfNormalResult) -> CurveSeries {
    let points = r
        .theoretical_q
        .iter()
        .zip(&r.sorted_abs_diag)
        .map(|(&q, &d)| Point::new(q, d))
        .collect();
    CurveSeries::new(CurveKind::HalfNormal, label, points)
        .with_aux("env_lo", r.env_lo.clone())
        .with_aux("env_hi", r.env_hi.clone())
        .with_aux("s", r.s.iter().map(|&s| s as f64).collect())
}

pub fn cooks_score(label: &str, r: &CooksResult) -> ScoreResult {
    r.score(label)
}

pub fn halfnormal_score(label: &str, r: &HalfNormalResult) -> ScoreResult {
    score_halfnormal(label, r)
}

fn require_refit<'a>(spec: Option<&'a RefitSpec>, kind: &str) -> CliResult<&'a RefitSpec> {
    spec.ok_or_else(|| {
        usage(format!(
            "`{kind}` refits a model; pass --model or --adapter"
        ))
    })
}

/// Raw scores of every model for the ranking table.
pub fn raw_scores(ds: &Dataset, ids: &[ScoreId]) -> CliResult<RawScores> {
    let frames = residual_frames(ds, ORDER_Y_HAT)?;
    let mut raw = RawScores::new();
    for id in ids {
        let entry = raw.entry(id.id().to_string()).or_default();
        for f in &frames {
            entry.insert(f.label.clone(), residual_score(*id, f)?.value);
        }
    }
    Ok(raw)
}

pub fn build_plot(
    kind: CurveKind,
    ds: &Dataset,
    opts: &PlotOptions,
    refit: Option<&RefitSpec>,
) -> CliResult<PlotOutput> {
    let key = opts
        .variable
        .clone()
        .unwrap_or_else(|| default_variable(kind).to_string());
    let mut out = PlotOutput::default();
    match kind {
        CurveKind::Residual => {
            for f in residual_frames(ds, &key)? {
                out.series.push(residual_scatter(&f));
            }
        }
        CurveKind::ResidualBoxplot => {
            let boxes: Vec<_> = residual_frames(ds, &key)?
                .iter()
                .map(residual_boxplot)
                .collect();
            // One column per model: whisker, quartiles, whisker at x = model position.
            for (k, b) in boxes.iter().enumerate() {
                let quartiles = [b.whisker_lo, b.q1, b.median, b.q3, b.whisker_hi];
                let points = quartiles.iter().map(|&v| Point::new(k as f64, v)).collect();
                out.series.push(
                    CurveSeries::new(CurveKind::ResidualBoxplot, &b.label, points)
                        .with_extra("outliers", b.outliers.clone())
                        .with_extra("rmse", vec![b.rmse_marker]),
                );
            }
            out.payload = Some(Payload::Boxplot { boxes });
        }
        CurveKind::ResidualDensity => {
            let group_col = match &opts.group {
                Some(g) => Some(
                    ds.frame
                        .variable(g)
                        .ok_or_else(|| usage(format!("unknown grouping variable `{g}`")))?,
                ),
                None => None,
            };
            for f in residual_frames(ds, ORDER_INDEX)? {
                let d = residual_density(&f, group_col)?;
                out.series.extend(d.series);
                out.warnings.extend(d.warnings);
            }
        }
        CurveKind::Acf => {
            for f in residual_frames(ds, &key)? {
                out.series.push(acf_curve(&acf(&f, opts.max_lag)?));
            }
        }
        CurveKind::Autocorrelation => {
            for f in residual_frames(ds, &key)? {
                out.series.push(autocorrelation_scatter(&f)?);
            }
        }
        CurveKind::ScaleLocation => {
            for f in residual_frames(ds, &key)? {
                let sl = scale_location(&f)?;
                out.series.push(sl.points);
                out.series.push(sl.smooth);
            }
        }
        CurveKind::Performance => {
            for f in residual_frames(ds, &key)? {
                let (s, smooth) = predicted_response(&f, opts.smooth)?;
                out.series.push(s);
                out.series.extend(smooth);
            }
        }
        CurveKind::Rec => {
            for f in residual_frames(ds, &key)? {
                out.series.push(rec_curve(&f));
            }
        }
        CurveKind::Rroc => {
            for f in residual_frames(ds, &key)? {
                out.series.push(rroc_curve(&f)?);
            }
        }
        CurveKind::Tsecdf => {
            for f in residual_frames(ds, &key)? {
                let t = tsecdf(&f)?;
                out.series.extend(t.negative);
                out.series.extend(t.positive);
            }
        }
        CurveKind::Roc => {
            for c in classification_frames(ds, kind.id())? {
                out.series.push(roc_curve(&c));
            }
        }
        CurveKind::Prc => {
            for c in classification_frames(ds, kind.id())? {
                out.series.push(prc_curve(&c));
            }
        }
        CurveKind::Lift => {
            let frames = classification_frames(ds, kind.id())?;
            for c in &frames {
                out.series.push(lift_chart(c).model);
            }
            let refs = lift_chart(&frames[0]);
            out.series.push(refs.ideal);
            out.series.push(refs.random);
        }
        CurveKind::Pca => {
            let frames = residual_frames(ds, ORDER_INDEX)?;
            let biplot = model_pca(&frames)?;
            let scores = biplot
                .scores
                .iter()
                .map(|s| Point::new(s[0], s[1]))
                .collect();
            out.series.push(grouped(
                CurveSeries::new(CurveKind::Pca, "observations", scores),
                "scores",
            ));
            for (label, l) in biplot.labels.iter().zip(&biplot.loadings) {
                let arrow = vec![Point::new(0.0, 0.0), Point::new(l[0], l[1])];
                out.series.push(grouped(
                    CurveSeries::new(CurveKind::Pca, label.as_str(), arrow),
                    "loadings",
                ));
            }
            out.payload = Some(Payload::Pca { biplot });
        }
        CurveKind::Correlation => {
            let frames = residual_frames(ds, ORDER_INDEX)?;
            let grid = model_correlation(ds.frame.y(), &frames)?;
            out.series
                .extend(grid.densities.into_iter().map(|s| grouped(s, "density")));
            out.series.extend(grid.scatter);
            out.payload = Some(Payload::Correlation {
                labels: grid.labels,
                matrix: grid.matrix,
            });
        }
        CurveKind::Radar => {
            let ids = if opts.radar_scores.is_empty() {
                DEFAULT_RADAR_SCORES.to_vec()
            } else {
                opts.radar_scores.clone()
            };
            if let Some(bad) = ids
                .iter()
                .find(|i| i.needs_refit() || i.is_classification())
            {
                return Err(usage(format!(
                    "score `{bad}` cannot be ranked from stored predictions"
                )));
            }
            let raw = raw_scores(ds, &ids)?;
            let reference = opts
                .reference
                .clone()
                .unwrap_or_else(|| ds.frame.models()[0].label.clone());
            let table = ranking(&raw, &reference)?;
            let names: Vec<String> = ids.iter().map(|i| i.id().to_string()).collect();
            out.series = radar_series(&table, &names);
            out.payload = Some(Payload::Ranking {
                table,
                scores: names,
            });
        }
        CurveKind::CooksDistance => {
            let spec = require_refit(refit, kind.id())?;
            let (result, warnings) = run_cooks(ds, spec)?;
            out.series.push(cooks_series(&spec.handle.name, &result));
            out.warnings = warnings;
            out.payload = Some(Payload::Cooks {
                label: spec.handle.name.clone(),
                result,
            });
        }
        CurveKind::HalfNormal => {
            let spec = require_refit(refit, kind.id())?;
            let result = run_halfnormal(ds, spec)?;
            out.series
                .push(halfnormal_series(&spec.handle.name, &result));
            out.payload = Some(Payload::HalfNormal {
                label: spec.handle.name.clone(),
                result,
            });
        }
    }
    Ok(out)
}
