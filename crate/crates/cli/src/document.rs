//! JSON output documents.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use resaudit_core::curves::BoxplotStats;
use resaudit_core::data::{CurveKind, CurveSeries, ScoreResult};
use resaudit_core::influence::{CooksResult, HalfNormalResult};
use resaudit_core::multimodel::{PcaBiplot, RankingTable};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Set when a seed was drawn from entropy or a model could not honor it.
    #[serde(default)]
    pub nondeterministic: bool,
    /// Unix seconds. Not part of the deterministic content.
    pub generated_at: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
}

impl Metadata {
    pub fn now() -> Self {
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Metadata {
            generated_at,
            ..Default::default()
        }
    }
}

/// Structured results that do not fit the `(x, y)` series shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Boxplot {
        boxes: Vec<BoxplotStats>,
    },
    Pca {
        biplot: PcaBiplot,
    },
    Correlation {
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    },
    Ranking {
        table: RankingTable,
        scores: Vec<String>,
    },
    Cooks {
        label: String,
        result: CooksResult,
    },
    HalfNormal {
        label: String,
        result: HalfNormalResult,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotDataDocument {
    pub schema_version: String,
    pub plot_type: String,
    pub series: Vec<CurveSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    pub metadata: Metadata,
}

impl PlotDataDocument {
    pub fn new(
        kind: CurveKind,
        series: Vec<CurveSeries>,
        payload: Option<Payload>,
        metadata: Metadata,
    ) -> Self {
        PlotDataDocument {
            schema_version: SCHEMA_VERSION.into(),
            plot_type: kind.id().into(),
            series,
            payload,
            metadata,
        }
    }

    pub fn kind(&self) -> CliResult<CurveKind> {
        CurveKind::from_id(&self.plot_type)
            .ok_or_else(|| CliError::Document(format!("unknown plot type `{}`", self.plot_type)))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let doc: PlotDataDocument =
            serde_json::from_str(text).map_err(|e| CliError::Document(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Document(format!(
                "unsupported schema version `{}`",
                doc.schema_version
            )));
        }
        doc.kind()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plot documents serialize")
    }

    /// Serialization with the timestamp zeroed, for determinism checks.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.metadata.generated_at = 0;
        c.to_json()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: String,
    pub scores: Vec<ScoreResult>,
    pub metadata: Metadata,
}

impl ScoreReport {
    pub fn new(scores: Vec<ScoreResult>, metadata: Metadata) -> Self {
        ScoreReport {
            schema_version: SCHEMA_VERSION.into(),
            scores,
            metadata,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("score reports serialize")
    }

    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.metadata.generated_at = 0;
        c.to_json()
    }
}

/// Zeroes `metadata.generated_at` in any output line that carries one.
pub fn strip_timestamp(line: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(line) {
        Ok(mut v) => {
            if let Some(meta) = v.get_mut("metadata").and_then(|m| m.as_object_mut()) {
                meta.insert("generated_at".into(), 0.into());
            }
            v.to_string()
        }
        Err(_) => line.to_string(),
    }
}
