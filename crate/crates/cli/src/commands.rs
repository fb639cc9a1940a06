//! Command-line surface.

use std::collections::hash_map::RandomState;
use std::ffi::OsString;
use std::hash::{BuildHasher, Hasher};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resaudit_core::auditor_data::{generate_auditor_rows, AUDITOR_HEADER};
use resaudit_core::data::{
    make_residual_frame, ClassificationFrame, CurveKind, ScoreResult, ORDER_Y_HAT,
};
use resaudit_core::influence::{
    CooksMethod, CooksOptions, HalfNormalDiagnostic, HalfNormalOptions, VarianceRule,
};
use resaudit_core::models::protocol::serve;
use resaudit_core::models::{AdapterDescriptor, Capability, ModelHandle, ModelSession};
use resaudit_core::scores::{residual_score, score_auc, score_auprc, ScoreId};

use crate::document::{Metadata, PlotDataDocument, ScoreReport};
use crate::error::{usage, CliError, CliResult, EXIT_OK};
use crate::ingest::{ingest_csv, rows_to_csv, Dataset, IngestConfig};
use crate::plots::{
    build_plot, cooks_score, cooks_series, halfnormal_score, halfnormal_series, run_cooks,
    run_halfnormal, PlotOptions, RefitSpec,
};
use crate::render::render_svg;

pub const SEED_ENV: &str = "RESAUDIT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "resaudit",
    version,
    about = "Residual diagnostics for regression and classification predictions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar diagnostics for every model in the dataset.
    Score(ScoreArgs),
    /// Plot data documents (JSON).
    Plot(PlotArgs),
    /// SVG rendering of a plot document.
    Render(RenderArgs),
    /// Cook's distances of a refitted model.
    Cooks(CooksArgs),
    /// Half-normal plot with simulated envelope.
    Halfnormal(HalfNormalArgs),
    /// Synthetic regression data with two planted outliers, as CSV.
    GenerateData(GenerateArgs),
    /// Serves a built-in model over the adapter protocol on stdin/stdout.
    #[command(hide = true)]
    ServeAdapter(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Wide CSV: response, `yhat:<label>` prediction columns, variables.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub y_column: String,
    /// Column with 0/1 labels for classification; `_y_` uses the response.
    #[arg(long)]
    pub label_column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinModel {
    Ols,
    Constant,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Built-in model to refit.
    #[arg(long, value_enum)]
    pub model: Option<BuiltinModel>,
    /// External adapter command line, split on whitespace.
    #[arg(long, conflicts_with = "model")]
    pub adapter: Option<String>,
    /// Design columns; defaults to every numeric variable.
    #[arg(long, value_delimiter = ',')]
    pub design: Vec<String>,
    /// Parallel model sessions for refits.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Seconds to wait for the adapter handshake.
    #[arg(long, default_value_t = 10.0)]
    pub handshake_timeout: f64,
    /// Seconds to wait for each fit, predict or simulate reply.
    #[arg(long, default_value_t = 60.0)]
    pub request_timeout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Hat,
    Loo,
}

#[derive(Debug, Args)]
pub struct RefitTuning {
    /// Observations flagged as most influential.
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Variance estimate in the Cook's denominator.
    #[arg(long, value_enum, default_value_t = VarianceArg::Unbiased)]
    pub variance: VarianceArg,
    /// Predictor count used by Cook's distance; defaults to the design width.
    #[arg(long)]
    pub predictors: Option<usize>,
    /// Half-normal simulations.
    #[arg(long, default_value_t = 100)]
    pub simulations: usize,
    /// Use standardized residuals for the half-normal plot (built-in OLS).
    #[arg(long)]
    pub standardized: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarianceArg {
    Unbiased,
    Mean,
}

fn parse_score_id(s: &str) -> Result<ScoreId, String> {
    s.parse()
}

fn parse_plot_kind(s: &str) -> Result<CurveKind, String> {
    CurveKind::from_id(s).ok_or_else(|| {
        let valid: Vec<&str> = CurveKind::ALL.iter().map(|k| k.id()).collect();
        format!("unknown plot type `{s}`; valid types: {}", valid.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Score identifiers (repeatable).
    #[arg(long = "type", required = true, value_parser = parse_score_id)]
    pub types: Vec<ScoreId>,
    /// Ordering axis for order-dependent scores.
    #[arg(long)]
    pub variable: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: RefitTuning,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Plot identifiers (repeatable).
    #[arg(long = "type", required = true, value_parser = parse_plot_kind)]
    pub types: Vec<CurveKind>,
    /// Ordering axis: a numeric variable, `_y_`, `_y_hat_` or `_index_`.
    #[arg(long)]
    pub variable: Option<String>,
    /// Grouping variable for residual densities.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Add a smoother to the prediction plot.
    #[arg(long)]
    pub smooth: bool,
    /// Reference model for radar scaling.
    #[arg(long)]
    pub reference: Option<String>,
    /// Scores on the radar axes (repeatable).
    #[arg(long = "radar-score", value_parser = parse_score_id)]
    pub radar_scores: Vec<ScoreId>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: RefitTuning,
    /// Writes `<type>.json` per plot instead of JSON lines on stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Plot document (JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CooksArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: RefitTuning,
    /// Writes `score.json` and `cooksdistance.json` instead of stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HalfNormalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub tuning: RefitTuning,
    /// Writes `score.json` and `halfnormal.json` instead of stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_enum, default_value_t = BuiltinModel::Ols)]
    pub model: BuiltinModel,
    /// Capabilities announced in the handshake.
    #[arg(long, value_delimiter = ',', default_value = "fit,predict,simulate")]
    pub capabilities: Vec<String>,
    #[arg(long)]
    pub name: Option<String>,
}

/// Seed from the flag, then `RESAUDIT_SEED`, then entropy (flagged).
pub fn resolve_seed(flag: Option<u64>) -> CliResult<(u64, bool)> {
    if let Some(s) = flag {
        return Ok((s, false));
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        let s = v.trim().parse::<u64>().map_err(|_| {
            usage(format!(
                "{SEED_ENV} must be a non-negative integer, got `{v}`"
            ))
        })?;
        return Ok((s, false));
    }
    let mut h = RandomState::new().build_hasher();
    h.write_u64(std::process::id() as u64);
    Ok((h.finish(), true))
}

fn secs(v: f64, what: &str) -> CliResult<Duration> {
    if v.is_finite() && v > 0.0 {
        Ok(Duration::from_secs_f64(v))
    } else {
        Err(usage(format!(
            "{what} must be a positive number of seconds"
        )))
    }
}

fn load(data: &DataArgs) -> CliResult<Dataset> {
    ingest_csv(
        &data.data,
        &IngestConfig {
            y_column: data.y_column.clone(),
            label_column: data.label_column.clone(),
        },
    )
}

fn base_metadata(ds: Option<&Dataset>) -> Metadata {
    let mut m = Metadata::now();
    m.dataset_sha256 = ds.map(|d| d.sha256.clone());
    m
}

/// Builds the refit specification, or `None` when no model was requested.
fn refit_spec(
    ds: &Dataset,
    label_column: Option<&str>,
    model: &ModelArgs,
    tuning: &RefitTuning,
    required: bool,
    needs_seed: bool,
    meta: &mut Metadata,
) -> CliResult<Option<RefitSpec>> {
    let handle = match (&model.adapter, model.model) {
        (Some(cmd), _) => {
            let mut d = AdapterDescriptor::from_command_line(cmd)?;
            d.handshake_timeout = secs(model.handshake_timeout, "handshake timeout")?;
            d.request_timeout = secs(model.request_timeout, "request timeout")?;
            ModelHandle::external(d)?
        }
        (None, Some(BuiltinModel::Ols)) => ModelHandle::ols(),
        (None, Some(BuiltinModel::Constant)) => ModelHandle::constant(),
        (None, None) if required => ModelHandle::ols(),
        (None, None) => return Ok(None),
    };
    let design = if model.design.is_empty() {
        ds.frame
            .variables()
            .iter()
            .filter(|(n, c)| c.as_numeric().is_some() && Some(n.as_str()) != label_column)
            .map(|(n, _)| n.clone())
            .collect()
    } else {
        model.design.clone()
    };
    // Cook's distance never simulates, so it does not draw a seed.
    let (seed, entropy) = if needs_seed {
        resolve_seed(tuning.seed)?
    } else {
        (tuning.seed.unwrap_or(0), false)
    };
    if needs_seed {
        meta.seed = Some(seed);
    }
    meta.nondeterministic |= entropy || (needs_seed && handle.is_nondeterministic());
    meta.parameters.insert("model".into(), handle.name.clone());
    meta.parameters.insert("design".into(), design.join(","));
    let method = match tuning.method {
        MethodArg::Auto => None,
        MethodArg::Hat => Some(CooksMethod::HatMatrix),
        MethodArg::Loo => Some(CooksMethod::LooRefit),
    };
    let variance = match tuning.variance {
        VarianceArg::Unbiased => VarianceRule::Unbiased,
        VarianceArg::Mean => VarianceRule::Mean,
    };
    let workers = model.workers.max(1);
    Ok(Some(RefitSpec {
        handle,
        design,
        cooks: CooksOptions {
            method,
            p: tuning.predictors,
            variance,
            top_k: tuning.top_k,
            workers,
        },
        halfnormal: HalfNormalOptions {
            m: tuning.simulations,
            seed,
            diagnostic: if tuning.standardized {
                HalfNormalDiagnostic::Standardized
            } else {
                HalfNormalDiagnostic::Raw
            },
            workers,
        },
    }))
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &mut dyn Write, path: Option<&Path>, content: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, content),
        None => Ok(out.write_all(content.as_bytes())?),
    }
}

fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load(&args.data)?;
    let mut meta = base_metadata(Some(&ds));
    let key = args
        .variable
        .clone()
        .unwrap_or_else(|| ORDER_Y_HAT.to_string());
    meta.parameters.insert("variable".into(), key.clone());
    let needs_refit = args.types.iter().any(|t| t.needs_refit());
    let stored: Vec<ScoreId> = args
        .types
        .iter()
        .copied()
        .filter(|t| !t.needs_refit())
        .collect();
    let spec = if needs_refit {
        let simulates = args.types.contains(&ScoreId::HalfNormal);
        refit_spec(
            &ds,
            args.data.label_column.as_deref(),
            &args.model,
            &args.tuning,
            true,
            simulates,
            &mut meta,
        )?
    } else {
        None
    };
    if !stored.is_empty() && ds.frame.models().is_empty() {
        return Err(usage("dataset has no `yhat:<label>` prediction columns"));
    }
    let mut scores: Vec<ScoreResult> = Vec::new();
    for m in ds.frame.models() {
        let rf = make_residual_frame(&ds.frame, &m.label, &key)?;
        for id in &stored {
            let result = if id.is_classification() {
                let labels = ds.labels.as_ref().ok_or_else(|| {
                    usage(format!(
                        "score `{id}` needs binary labels; pass --label-column"
                    ))
                })?;
                let cf = ClassificationFrame::new(&m.label, labels, m.y_hat.clone())?;
                if *id == ScoreId::Auc {
                    score_auc(&cf)
                } else {
                    score_auprc(&cf)
                }
            } else {
                residual_score(*id, &rf)?
            };
            scores.push(result);
        }
    }
    if let Some(spec) = &spec {
        for id in args.types.iter().filter(|t| t.needs_refit()) {
            match id {
                ScoreId::CooksDistance => {
                    let (r, w) = run_cooks(&ds, spec)?;
                    meta.warnings.extend(w);
                    scores.push(cooks_score(&spec.handle.name, &r));
                }
                _ => {
                    let r = run_halfnormal(&ds, spec)?;
                    meta.nondeterministic |= r.nondeterministic;
                    scores.push(halfnormal_score(&spec.handle.name, &r));
                }
            }
        }
    }
    let report = ScoreReport::new(scores, meta);
    emit(out, args.out.as_deref(), &(report.to_json() + "\n"))
}

fn cmd_plot(args: &PlotArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load(&args.data)?;
    let opts = PlotOptions {
        variable: args.variable.clone(),
        group: args.group.clone(),
        max_lag: args.max_lag,
        smooth: args.smooth,
        reference: args.reference.clone(),
        radar_scores: args.radar_scores.clone(),
    };
    let needs_refit = args
        .types
        .iter()
        .any(|k| matches!(k, CurveKind::CooksDistance | CurveKind::HalfNormal));
    let mut refit_meta = Metadata::default();
    let spec = if needs_refit {
        let simulates = args.types.contains(&CurveKind::HalfNormal);
        refit_spec(
            &ds,
            args.data.label_column.as_deref(),
            &args.model,
            &args.tuning,
            true,
            simulates,
            &mut refit_meta,
        )?
    } else {
        None
    };
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
    }
    for kind in &args.types {
        let built = build_plot(*kind, &ds, &opts, spec.as_ref())?;
        let mut meta = base_metadata(Some(&ds));
        meta.warnings = built.warnings;
        if matches!(kind, CurveKind::CooksDistance | CurveKind::HalfNormal) {
            meta.seed = refit_meta.seed;
            meta.nondeterministic = refit_meta.nondeterministic;
            meta.parameters.extend(refit_meta.parameters.clone());
        }
        if let Some(v) = &args.variable {
            meta.parameters.insert("variable".into(), v.clone());
        }
        if let Some(g) = &args.group {
            meta.parameters.insert("group".into(), g.clone());
        }
        let doc = PlotDataDocument::new(*kind, built.series, built.payload, meta);
        let line = doc.to_json() + "\n";
        match &args.out_dir {
            Some(dir) => write_file(&dir.join(format!("{}.json", kind.id())), &line)?,
            None => out.write_all(line.as_bytes())?,
        }
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.input).map_err(|source| CliError::Read {
        path: args.input.clone(),
        source,
    })?;
    let doc = PlotDataDocument::from_json(text.trim())?;
    emit(out, args.out.as_deref(), &render_svg(&doc)?)
}

fn refit_outputs(
    out: &mut dyn Write,
    out_dir: Option<&Path>,
    kind: CurveKind,
    score: ScoreResult,
    doc: PlotDataDocument,
) -> CliResult<()> {
    let report = ScoreReport::new(vec![score], doc.metadata.clone());
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.to_path_buf(),
                source,
            })?;
            write_file(&dir.join("score.json"), &(report.to_json() + "\n"))?;
            write_file(
                &dir.join(format!("{}.json", kind.id())),
                &(doc.to_json() + "\n"),
            )
        }
        None => {
            writeln!(out, "{}", report.to_json())?;
            writeln!(out, "{}", doc.to_json())?;
            Ok(())
        }
    }
}

fn cmd_cooks(args: &CooksArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load(&args.data)?;
    let mut meta = base_metadata(Some(&ds));
    let spec = refit_spec(
        &ds,
        args.data.label_column.as_deref(),
        &args.model,
        &args.tuning,
        true,
        false,
        &mut meta,
    )?
    .expect("model required");
    let (result, warnings) = run_cooks(&ds, &spec)?;
    meta.warnings.extend(warnings);
    meta.parameters
        .insert("method".into(), format!("{:?}", result.method));
    let label = spec.handle.name.clone();
    let score = cooks_score(&label, &result);
    let series = vec![cooks_series(&label, &result)];
    let payload = crate::document::Payload::Cooks { label, result };
    let doc = PlotDataDocument::new(CurveKind::CooksDistance, series, Some(payload), meta);
    refit_outputs(
        out,
        args.out_dir.as_deref(),
        CurveKind::CooksDistance,
        score,
        doc,
    )
}

fn cmd_halfnormal(args: &HalfNormalArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load(&args.data)?;
    let mut meta = base_metadata(Some(&ds));
    let spec = refit_spec(
        &ds,
        args.data.label_column.as_deref(),
        &args.model,
        &args.tuning,
        true,
        true,
        &mut meta,
    )?
    .expect("model required");
    let result = run_halfnormal(&ds, &spec)?;
    meta.nondeterministic |= result.nondeterministic;
    let label = spec.handle.name.clone();
    let score = halfnormal_score(&label, &result);
    let series = vec![halfnormal_series(&label, &result)];
    let payload = crate::document::Payload::HalfNormal { label, result };
    let doc = PlotDataDocument::new(CurveKind::HalfNormal, series, Some(payload), meta);
    refit_outputs(
        out,
        args.out_dir.as_deref(),
        CurveKind::HalfNormal,
        score,
        doc,
    )
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let (seed, entropy) = resolve_seed(args.seed)?;
    if entropy {
        writeln!(
            err,
            "warning: no seed given; using {seed} (output is not reproducible without it)"
        )?;
    }
    let rows: Vec<Vec<f64>> = generate_auditor_rows(seed)
        .iter()
        .map(|r| r.to_vec())
        .collect();
    emit(
        out,
        args.out.as_deref(),
        &rows_to_csv(&AUDITOR_HEADER, &rows),
    )
}

fn cmd_serve(args: &ServeArgs, out: &mut dyn Write) -> CliResult<()> {
    let caps = args
        .capabilities
        .iter()
        .filter_map(|c| Capability::from_id(c.trim()))
        .collect();
    let (mut session, default_name): (Box<dyn ModelSession>, &str) = match args.model {
        BuiltinModel::Ols => (ModelHandle::ols().open()?, "ols"),
        BuiltinModel::Constant => (ModelHandle::constant().open()?, "constant"),
    };
    let name = args.name.as_deref().unwrap_or(default_name);
    serve(session.as_mut(), name, &caps, io::stdin().lock(), out)?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Score(a) => cmd_score(a, out),
        Command::Plot(a) => cmd_plot(a, out),
        Command::Render(a) => cmd_render(a, out),
        Command::Cooks(a) => cmd_cooks(a, out),
        Command::Halfnormal(a) => cmd_halfnormal(a, out),
        Command::GenerateData(a) => cmd_generate(a, out, err),
        Command::ServeAdapter(a) => cmd_serve(a, out),
    }
}

/// Parses arguments and runs one command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
