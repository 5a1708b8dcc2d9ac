//! Confusion counts and precision / recall / F1.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{EvalRecord, TruthEntry};
use super::{EvalError, LineError};
use crate::report::ReportDocument;
use crate::verify::Finding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    /// One decision per record.
    SampleLevel,
    /// One decision per hallucinated symbol.
    InstanceLevel,
}

/// Ratios are `None` when their denominator is zero. The `display` block
/// carries the same ratios rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub granularity: Granularity,
    pub display: RoundedMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundedMetrics {
    pub precision: Option<String>,
    pub recall: Option<String>,
    pub f1: Option<String>,
}

pub fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn f1(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

pub fn two_dp(x: f64) -> String {
    format!("{x:.2}")
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, granularity: Granularity) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) => f1(p, r),
            _ => None,
        };
        Metrics {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            granularity,
            display: RoundedMetrics {
                precision: precision.map(two_dp),
                recall: recall.map(two_dp),
                f1: f1.map(two_dp),
            },
        }
    }
}

fn truth_matches(truth: &TruthEntry, finding: &Finding) -> bool {
    if truth.kind.name() != finding.kind.name() || truth.symbol != finding.kind.symbol() {
        return false;
    }
    match (&truth.on_type, finding.kind.on_type()) {
        (None, _) => true,
        (Some(want), Some(got)) => {
            let got = got.as_str();
            got == want || got.strip_suffix(want.as_str()).is_some_and(|rest| rest.ends_with('.'))
        }
        (Some(_), None) => false,
    }
}

/// Instance-level counts for one record. Each finding claims at most one
/// matching truth entry, first come first served.
fn match_instances(record: &EvalRecord, findings: &[Finding]) -> (usize, usize, usize) {
    let truths: Vec<&TruthEntry> = record.hallucinations().collect();
    let mut claimed = vec![false; truths.len()];
    let mut tp = 0;
    for f in findings {
        if let Some(i) = (0..truths.len()).find(|&i| !claimed[i] && truth_matches(truths[i], f)) {
            claimed[i] = true;
            tp += 1;
        }
    }
    (tp, findings.len() - tp, truths.len() - tp)
}

/// Scores checker reports against ground truth. Every record needs a report.
pub fn score_detector(
    predictions: &BTreeMap<String, ReportDocument>,
    records: &[EvalRecord],
    granularity: Granularity,
) -> Result<Metrics, EvalError> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for r in records {
        let doc = predictions.get(&r.id).ok_or_else(|| EvalError::MissingPrediction(r.id.clone()))?;
        match granularity {
            Granularity::SampleLevel => {
                let predicted = !doc.findings.is_empty();
                match (predicted, r.labels.hallucinated) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            Granularity::InstanceLevel => {
                let (t, f, n) = match_instances(r, &doc.findings);
                tp += t;
                fp += f;
                fn_ += n;
            }
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_, granularity))
}

/// An external judge's decision on one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Verdict {
    pub hallucinated: bool,
    pub explanation_matched: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct VerdictLine {
    id: String,
    hallucinated: bool,
    explanation_matched: bool,
}

pub fn parse_verdicts(text: &str) -> Result<BTreeMap<String, Verdict>, EvalError> {
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<VerdictLine>(line) {
            Ok(v) => {
                let verdict = Verdict { hallucinated: v.hallucinated, explanation_matched: v.explanation_matched };
                if out.insert(v.id.clone(), verdict).is_some() {
                    errors.push(LineError { line: i + 1, message: format!("duplicate id `{}`", v.id) });
                }
            }
            Err(e) => errors.push(LineError { line: i + 1, message: e.to_string() }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(EvalError::Schema(errors))
    }
}

/// Sample-level metrics for judge verdicts. A verdict counts as a positive
/// only when the judge both flagged the record and gave the right reason.
pub fn score_verdicts(verdicts: &BTreeMap<String, Verdict>, records: &[EvalRecord]) -> Result<Metrics, EvalError> {
    if let Some(id) = verdicts.keys().find(|id| !records.iter().any(|r| &r.id == *id)) {
        return Err(EvalError::UnknownId(id.clone()));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for r in records {
        let v = verdicts.get(&r.id).ok_or_else(|| EvalError::MissingPrediction(r.id.clone()))?;
        match (v.hallucinated && v.explanation_matched, r.labels.hallucinated) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_, Granularity::SampleLevel))
}

pub fn score_judge(verdicts_path: &Path, records: &[EvalRecord]) -> Result<Metrics, EvalError> {
    score_verdicts(&parse_verdicts(&super::read(verdicts_path)?)?, records)
}
