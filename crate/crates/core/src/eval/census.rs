//! Failure and hallucination counts per corpus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{EvalRecord, TruthKind};
use crate::report::ReportDocument;
use crate::verify::Tier;

/// `atomic` and `scopeBound` count findings, so one record can add several.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaxonomyCensus {
    /// Records whose migration was judged invalid, for any reason.
    pub invalid: usize,
    pub hallucinated_cases: usize,
    pub atomic: usize,
    pub scope_bound: usize,
}

/// Counts from checker reports; `invalid` comes from the labels.
/// Reports without a matching record are ignored.
pub fn taxonomy_census(predictions: &BTreeMap<String, ReportDocument>, records: &[EvalRecord]) -> TaxonomyCensus {
    let mut c = TaxonomyCensus::default();
    for r in records {
        if !r.labels.valid_migration {
            c.invalid += 1;
        }
        let Some(doc) = predictions.get(&r.id) else { continue };
        if !doc.findings.is_empty() {
            c.hallucinated_cases += 1;
        }
        for f in &doc.findings {
            match f.tier {
                Tier::Atomic => c.atomic += 1,
                Tier::ScopeBound => c.scope_bound += 1,
            }
        }
    }
    c
}

/// The same counts taken from the annotations alone.
pub fn annotated_census(records: &[EvalRecord]) -> TaxonomyCensus {
    let mut c = TaxonomyCensus::default();
    for r in records {
        c.invalid += usize::from(!r.labels.valid_migration);
        c.hallucinated_cases += usize::from(r.labels.hallucinated);
        for t in &r.ground_truth {
            match t.kind {
                TruthKind::PhantomSymbol => c.atomic += 1,
                TruthKind::PhantomMember | TruthKind::BrokenChain => c.scope_bound += 1,
                TruthKind::ApiMisuse => {}
            }
        }
    }
    c
}
