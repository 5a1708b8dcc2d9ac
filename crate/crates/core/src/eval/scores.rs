//! Similarity-score distributions for hallucinated and clean records.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::EvalRecord;
use super::{EvalError, LineError};

pub const BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl GroupStats {
    /// `None` for an empty group.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return None;
        }
        // Summing in sorted order keeps the mean independent of input order.
        let mean = v.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        Some(GroupStats { count: n, mean, median, min: v[0], max: v[n - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreStats {
    pub hallucinated: Option<GroupStats>,
    pub no_hallucination: Option<GroupStats>,
    /// `|mean_hallucinated - mean_clean|`, when both groups are present.
    pub mean_gap: Option<f64>,
    /// Shared part of the two groups' `[min, max]` ranges.
    pub range_overlap: Option<[f64; 2]>,
    pub histogram: Histogram,
}

/// Equal-width bins over `[0, 1]`; a score of exactly 1 falls in the last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Histogram {
    pub bins: usize,
    pub hallucinated: Vec<usize>,
    pub no_hallucination: Vec<usize>,
}

pub fn bin_of(score: f64) -> usize {
    ((score * BINS as f64) as usize).min(BINS - 1)
}

fn histogram(values: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; BINS];
    for &v in values {
        counts[bin_of(v)] += 1;
    }
    counts
}

/// Parses `id,score` rows. A first row whose score column is not a number
/// is taken as a header.
pub fn parse_scores(text: &str) -> Result<Vec<(String, f64)>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in reader.records().enumerate() {
        let line = rec.as_ref().ok().and_then(|r| r.position()).map_or(i + 1, |p| p.line() as usize);
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                errors.push(LineError { line, message: e.to_string() });
                continue;
            }
        };
        if rec.len() != 2 {
            errors.push(LineError { line, message: format!("expected 2 columns, found {}", rec.len()) });
            continue;
        }
        let score = match rec[1].parse::<f64>() {
            Ok(s) => s,
            Err(_) if i == 0 => continue,
            Err(e) => {
                errors.push(LineError { line, message: format!("bad score `{}`: {e}", &rec[1]) });
                continue;
            }
        };
        if !(0.0..=1.0).contains(&score) {
            errors.push(LineError { line, message: format!("score {score} outside [0, 1]") });
        } else if !seen.insert(rec[0].to_string()) {
            errors.push(LineError { line, message: format!("duplicate id `{}`", &rec[0]) });
        } else {
            rows.push((rec[0].to_string(), score));
        }
    }
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(EvalError::Schema(errors))
    }
}

/// Splits scores by the records' hallucination label and summarises each
/// group. Records without a score are left out.
pub fn distributions(scores: &[(String, f64)], records: &[EvalRecord]) -> Result<ScoreStats, EvalError> {
    let labels: BTreeMap<&str, bool> = records.iter().map(|r| (r.id.as_str(), r.labels.hallucinated)).collect();
    let (mut h, mut nh) = (Vec::new(), Vec::new());
    for (id, score) in scores {
        match labels.get(id.as_str()) {
            Some(true) => h.push(*score),
            Some(false) => nh.push(*score),
            None => return Err(EvalError::UnknownId(id.clone())),
        }
    }
    let hallucinated = GroupStats::of(&h);
    let no_hallucination = GroupStats::of(&nh);
    let (mean_gap, range_overlap) = match (&hallucinated, &no_hallucination) {
        (Some(a), Some(b)) => {
            let lo = a.min.max(b.min);
            let hi = a.max.min(b.max);
            (Some((a.mean - b.mean).abs()), (lo <= hi).then_some([lo, hi]))
        }
        _ => (None, None),
    };
    Ok(ScoreStats {
        hallucinated,
        no_hallucination,
        mean_gap,
        range_overlap,
        histogram: Histogram { bins: BINS, hallucinated: histogram(&h), no_hallucination: histogram(&nh) },
    })
}

pub fn score_distributions(scores_path: &Path, records: &[EvalRecord]) -> Result<ScoreStats, EvalError> {
    distributions(&parse_scores(&super::read(scores_path)?)?, records)
}
