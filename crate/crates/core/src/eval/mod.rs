//! Evaluation harness: labeled datasets, detector and judge metrics, score
//! distributions and a taxonomy census, bundled into one metrics document.
//!
//! Metrics JSON (schema version 1, keys sorted):
//!
//! ```text
//! {
//!   "census": {"annotated": Census, "detected": Census},
//!   "detector": {"instance": Metrics, "sample": Metrics},
//!   "judge": Metrics,            // only with verdicts
//!   "oracleId": "...",
//!   "records": N,
//!   "schemaVersion": 1,
//!   "scores": ScoreStats,        // only with scores
//!   "toolVersion": "..."
//! }
//! ```

pub mod census;
pub mod dataset;
pub mod metrics;
pub mod scores;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use census::{annotated_census, taxonomy_census, TaxonomyCensus};
pub use dataset::{load_dataset, parse_dataset, run_checker, EvalRecord, Labels, TruthEntry, TruthKind};
pub use metrics::{parse_verdicts, score_detector, score_judge, score_verdicts, Granularity, Metrics, Verdict};
pub use scores::{distributions, parse_scores, score_distributions, GroupStats, Histogram, ScoreStats};

use crate::oracle::SymbolTable;
use crate::report::{SCHEMA_VERSION, TOOL_VERSION};
use crate::verify::CheckOptions;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<LineError>),
    #[error("no prediction for record `{0}`")]
    MissingPrediction(String),
    #[error("unknown record id `{0}`")]
    UnknownId(String),
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorMetrics {
    pub sample: Metrics,
    pub instance: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusPair {
    pub detected: TaxonomyCensus,
    pub annotated: TaxonomyCensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub oracle_id: String,
    pub records: usize,
    pub detector: DetectorMetrics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub judge: Option<Metrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scores: Option<ScoreStats>,
    pub census: CensusPair,
}

impl EvalReport {
    /// Canonical bytes: sorted keys, two-space indent, trailing newline.
    pub fn to_json(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("metrics serialize");
        let mut out = serde_json::to_vec_pretty(&value).expect("value serializes");
        out.push(b'\n');
        out
    }
}

/// Input files for one evaluation run.
#[derive(Debug, Clone, Default)]
pub struct EvalInputs {
    pub dataset: PathBuf,
    pub verdicts: Option<PathBuf>,
    pub scores: Option<PathBuf>,
}

/// Loads everything, checks every record and assembles the metrics.
pub fn evaluate(table: &SymbolTable, inputs: &EvalInputs, options: CheckOptions) -> Result<EvalReport, EvalError> {
    let records = load_dataset(&inputs.dataset)?;
    let judge = inputs.verdicts.as_deref().map(|p| score_judge(p, &records)).transpose()?;
    let scores = inputs.scores.as_deref().map(|p| score_distributions(p, &records)).transpose()?;
    let predictions = run_checker(&records, table, options);
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        oracle_id: table.fingerprint().to_string(),
        records: records.len(),
        detector: DetectorMetrics {
            sample: score_detector(&predictions, &records, Granularity::SampleLevel)?,
            instance: score_detector(&predictions, &records, Granularity::InstanceLevel)?,
        },
        judge,
        scores,
        census: CensusPair { detected: taxonomy_census(&predictions, &records), annotated: annotated_census(&records) },
    })
}
