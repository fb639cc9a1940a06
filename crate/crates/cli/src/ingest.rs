//! Wide-CSV ingestion.
//!
//! One column holds the observed response, every `yhat:<label>` column holds
//! the predictions of model `<label>`, and all remaining columns become
//! variables. A variable is numeric when every cell parses as a finite
//! number, categorical otherwise.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use resaudit_core::data::{AuditFrame, Column, ModelPredictions, ORDER_Y};
use sha2::{Digest, Sha256};

use crate::error::{usage, CliError, CliResult};

pub const MODEL_PREFIX: &str = "yhat:";

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub y_column: String,
    /// Binary 0/1 labels for classification plots; `_y_` uses the response.
    pub label_column: Option<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            y_column: "y".into(),
            label_column: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub frame: AuditFrame,
    pub labels: Option<Vec<f64>>,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn ingest_csv(path: &Path, cfg: &IngestConfig) -> CliResult<Dataset> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_bytes(&bytes, cfg)
}

fn parse_number(cell: &str, row: usize, column: &str) -> CliResult<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Csv(format!(
            "row {row} (line {}), column `{column}`: `{cell}` is not a finite number",
            row + 1
        ))),
    }
}

pub fn ingest_bytes(bytes: &[u8], cfg: &IngestConfig) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Csv(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(CliError::Csv(format!("duplicate header `{h}`")));
        }
    }
    let y_idx = headers
        .iter()
        .position(|h| *h == cfg.y_column)
        .ok_or_else(|| CliError::Csv(format!("missing response column `{}`", cfg.y_column)))?;
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Csv(e.to_string()))?;
        for (j, cell) in record.iter().enumerate() {
            cells[j].push(cell.to_string());
        }
    }
    let numeric = |j: usize| -> CliResult<Vec<f64>> {
        cells[j]
            .iter()
            .enumerate()
            .map(|(i, c)| parse_number(c, i + 1, &headers[j]))
            .collect()
    };
    let y = numeric(y_idx)?;
    let mut models = Vec::new();
    let mut variables = Vec::new();
    for (j, h) in headers.iter().enumerate() {
        if j == y_idx {
            continue;
        }
        if let Some(label) = h.strip_prefix(MODEL_PREFIX) {
            if label.is_empty() {
                return Err(CliError::Csv(format!(
                    "column `{h}` has an empty model label"
                )));
            }
            models.push(ModelPredictions {
                label: label.to_string(),
                y_hat: numeric(j)?,
            });
        } else {
            let parsed: Option<Vec<f64>> = cells[j]
                .iter()
                .map(|c| c.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect();
            let col = match parsed {
                Some(v) if !v.is_empty() => Column::Numeric(v),
                _ => Column::Categorical(cells[j].clone()),
            };
            variables.push((h.clone(), col));
        }
    }
    let frame = AuditFrame::new(y, models, variables)?;
    let labels = match &cfg.label_column {
        None => None,
        Some(name) => Some(label_values(&frame, name)?),
    };
    Ok(Dataset {
        frame,
        labels,
        sha256: sha256_hex(bytes),
    })
}

fn label_values(frame: &AuditFrame, name: &str) -> CliResult<Vec<f64>> {
    let values = if name == ORDER_Y {
        frame.y().to_vec()
    } else {
        match frame.variable(name) {
            Some(Column::Numeric(v)) => v.clone(),
            Some(Column::Categorical(_)) => {
                return Err(usage(format!(
                    "label column `{name}` must contain only 0 and 1"
                )))
            }
            None => return Err(usage(format!("unknown label column `{name}`"))),
        }
    };
    if let Some(i) = values.iter().position(|v| *v != 0.0 && *v != 1.0) {
        return Err(usage(format!(
            "label column `{name}` must contain only 0 and 1 (row {}: {})",
            i + 1,
            values[i]
        )));
    }
    Ok(values)
}

/// Formats a value with the shortest representation that parses back to
/// the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// Numeric rows as CSV text with the given header.
pub fn rows_to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_number(*v));
        }
        out.push('\n');
    }
    out
}

/// Serializes a frame back to wide CSV: response, models, then variables.
pub fn frame_to_csv(frame: &AuditFrame, y_column: &str) -> CliResult<String> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![y_column.to_string()];
    header.extend(
        frame
            .models()
            .iter()
            .map(|m| format!("{MODEL_PREFIX}{}", m.label)),
    );
    header.extend(frame.variables().iter().map(|(n, _)| n.clone()));
    writer
        .write_record(&header)
        .map_err(|e| CliError::Csv(e.to_string()))?;
    for i in 0..frame.n() {
        let mut row = vec![format_number(frame.y()[i])];
        row.extend(frame.models().iter().map(|m| format_number(m.y_hat[i])));
        for (_, col) in frame.variables() {
            row.push(match col {
                Column::Numeric(v) => format_number(v[i]),
                Column::Categorical(v) => v[i].clone(),
            });
        }
        writer
            .write_record(&row)
            .map_err(|e| CliError::Csv(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
