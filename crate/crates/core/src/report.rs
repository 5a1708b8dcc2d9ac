//! Report documents: canonical JSON and a one-line-per-finding text form.
//!
//! JSON keys are sorted and carry no whitespace, so equal documents are
//! byte-identical. Schema (version 1):
//!
//! ```text
//! {
//!   "census": {"atomicChecked", "chainsChecked", "unitsChecked", "unitsSkipped", "unresolved"},
//!   "diagnostics": [{"column", "kind", "line", "message"}],
//!   "findings": [{"explanation", "kind", "location": {"column", "line"}, "tier", ...}],
//!   "oracleId": "<sha-256 of the API spec>",
//!   "sampleId": "<id>" | null,
//!   "schemaVersion": 1,
//!   "toolVersion": "<semver>"
//! }
//! ```
//!
//! Kind-specific finding keys: `class`/`member` for `PhantomSymbol`,
//! `method`/`onType` for `PhantomMember` and `BrokenChain`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::extract::ast::{Diagnostic, DiagnosticKind};
use crate::oracle::SymbolTable;
use crate::verify::{Census, Finding, FindingKind, Report};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit status: no findings.
pub const EXIT_CLEAN: i32 = 0;
/// Process exit status: at least one finding.
pub const EXIT_FINDINGS: i32 = 1;
/// Process exit status: bad input (unreadable file, malformed oracle, ...).
pub const EXIT_ERROR: i32 = 2;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDocument {
    pub schema_version: u32,
    pub sample_id: Option<String>,
    pub findings: Vec<Finding>,
    pub census: Census,
    pub diagnostics: Vec<Diagnostic>,
    pub oracle_id: String,
    pub tool_version: String,
}

impl ReportDocument {
    pub fn new(report: Report, sample_id: Option<String>, table: &SymbolTable) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            sample_id,
            findings: report.findings,
            census: report.census,
            diagnostics: report.diagnostics,
            oracle_id: table.fingerprint().to_string(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.findings.is_empty() {
            EXIT_CLEAN
        } else {
            EXIT_FINDINGS
        }
    }
}

/// Canonical JSON bytes.
pub fn to_json(doc: &ReportDocument) -> Vec<u8> {
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(doc).expect("report serializes");
    serde_json::to_vec(&value).expect("value serializes")
}

pub fn from_json(bytes: &[u8]) -> Result<ReportDocument, serde_json::Error> {
    serde_json::from_slice(bytes)
}

/// `LINE:COL TIER KIND symbol — explanation` per finding, then a census line.
pub fn to_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    if doc.findings.is_empty() {
        out.push_str("no hallucinations detected\n");
    }
    for f in &doc.findings {
        let _ = writeln!(out, "{} {:?} {} {} \u{2014} {}", f.location, f.tier, f.kind.name(), display_symbol(&f.kind), f.explanation);
    }
    out.push_str(&census_line(&doc.census, &doc.diagnostics));
    out.push('\n');
    out
}

fn display_symbol(kind: &FindingKind) -> String {
    match kind.on_type() {
        Some(t) => format!("{}.{}", t.simple_name(), kind.symbol()),
        None => kind.symbol().to_string(),
    }
}

fn census_line(c: &Census, diagnostics: &[Diagnostic]) -> String {
    let mut line = format!(
        "checked {} unit{} ({} atomic, {} chain{}), skipped {}",
        c.units_checked,
        plural(c.units_checked),
        c.atomic_checked,
        c.chains_checked,
        plural(c.chains_checked),
        c.units_skipped
    );
    if c.unresolved > 0 {
        let _ = write!(line, ", {} unresolved", c.unresolved);
    }
    let skipped_regions = diagnostics.iter().filter(|d| d.kind == DiagnosticKind::SkippedRegion).count();
    if skipped_regions > 0 {
        let _ = write!(line, ", {} unparseable region{}", skipped_regions, plural(skipped_regions));
    }
    line
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}
