//! Labeled migration samples, one JSON object per line.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvalError, LineError};
use crate::extract::{imports_of, Snippet};
use crate::oracle::SymbolTable;
use crate::report::ReportDocument;
use crate::verify::{check_snippet, CheckOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TruthKind {
    PhantomSymbol,
    PhantomMember,
    BrokenChain,
    /// A wrong but existing API use. Never part of the positive class.
    ApiMisuse,
}

impl TruthKind {
    pub fn name(self) -> &'static str {
        match self {
            TruthKind::PhantomSymbol => "PhantomSymbol",
            TruthKind::PhantomMember => "PhantomMember",
            TruthKind::BrokenChain => "BrokenChain",
            TruthKind::ApiMisuse => "ApiMisuse",
        }
    }

    pub fn is_hallucination(self) -> bool {
        self != TruthKind::ApiMisuse
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TruthEntry {
    pub kind: TruthKind,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_type: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Labels {
    pub valid_migration: bool,
    pub hallucinated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EvalRecord {
    pub id: String,
    pub legacy_snippet: String,
    pub generated_patch: String,
    pub ground_truth: Vec<TruthEntry>,
    pub labels: Labels,
    pub generator_model: String,
}

impl EvalRecord {
    /// Ground-truth entries in the positive class.
    pub fn hallucinations(&self) -> impl Iterator<Item = &TruthEntry> {
        self.ground_truth.iter().filter(|t| t.kind.is_hallucination())
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        let has_hallucination = self.hallucinations().next().is_some();
        if self.labels.hallucinated && !has_hallucination {
            return Err("labelled hallucinated but groundTruth has no hallucination entry".into());
        }
        if !self.labels.hallucinated && has_hallucination {
            return Err("groundTruth lists a hallucination but the label says none".into());
        }
        Ok(())
    }
}

/// Parses JSONL text. Blank lines are ignored; every bad line is reported.
pub fn parse_dataset(text: &str) -> Result<Vec<EvalRecord>, EvalError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        match serde_json::from_str::<EvalRecord>(line) {
            Ok(r) => match r.validate() {
                Err(message) => errors.push(LineError { line: line_no, message }),
                Ok(()) if !seen.insert(r.id.clone()) => {
                    errors.push(LineError { line: line_no, message: format!("duplicate id `{}`", r.id) })
                }
                Ok(()) => records.push(r),
            },
            Err(e) => errors.push(LineError { line: line_no, message: e.to_string() }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(EvalError::Schema(errors))
    }
}

pub fn load_dataset(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    parse_dataset(&super::read(path)?)
}

/// Checks every record's generated patch, with the legacy snippet's imports
/// as context. Records are checked in parallel; the map is ordered by id.
pub fn run_checker(
    records: &[EvalRecord],
    table: &SymbolTable,
    options: CheckOptions,
) -> BTreeMap<String, ReportDocument> {
    records
        .par_iter()
        .map(|r| {
            let snippet = Snippet::new(r.generated_patch.clone())
                .with_imports(imports_of(&r.legacy_snippet))
                .with_origin(r.id.clone());
            let report = check_snippet(&snippet, table, options);
            (r.id.clone(), ReportDocument::new(report, Some(r.id.clone()), table))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"id":"a","legacySnippet":"","generatedPatch":"x();","groundTruth":[],"labels":{"validMigration":true,"hallucinated":false},"generatorModel":"m"}"#;

    #[test]
    fn empty_file() {
        assert!(parse_dataset("").unwrap().is_empty());
    }

    #[test]
    fn good_line() {
        let r = parse_dataset(&format!("{GOOD}\n\n")).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].generated_patch, "x();");
    }

    #[test]
    fn missing_field_names_the_line() {
        let bad = GOOD.replace(r#""generatedPatch":"x();","#, "");
        let Err(EvalError::Schema(errs)) = parse_dataset(&format!("{GOOD}\n{bad}\n")) else { panic!() };
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 2);
        assert!(errs[0].message.contains("generatedPatch"), "{}", errs[0].message);
    }

    #[test]
    fn label_consistency_and_duplicates() {
        let lying = GOOD.replace(r#""hallucinated":false"#, r#""hallucinated":true"#);
        let misuse_only = lying.replace(r#""groundTruth":[]"#, r#""groundTruth":[{"kind":"ApiMisuse","symbol":"x"}]"#);
        let Err(EvalError::Schema(errs)) = parse_dataset(&format!("{lying}\n{misuse_only}\n{GOOD}\n{GOOD}")) else {
            panic!()
        };
        let lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, [1, 2, 4]);
    }
}
