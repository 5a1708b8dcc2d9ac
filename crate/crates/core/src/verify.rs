//! Checks extracted units against the oracle.
//!
//! Atomic units are a direct membership test. Invocation units walk the
//! chain left to right, carrying the current receiver type and stopping at
//! the first member the type does not have or at a void call that is not
//! last. Whenever the oracle cannot settle a question (unknown class,
//! ambiguous overloads, erased generic return) the walk halts silently.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::ast::{Diagnostic, Span};
use crate::extract::{
    build_scope, effective_imports, extract_units, parse_snippet, ChainCall, CheckUnit, Snippet, UnitKind,
};
use crate::oracle::{ClassEntry, QualifiedName, ReturnType, SymbolTable, JAVA_LANG_OBJECT};

/// Public methods every class inherits from `java.lang.Object`.
pub const OBJECT_METHODS: [&str; 7] = ["equals", "getClass", "hashCode", "notify", "notifyAll", "toString", "wait"];

const CONSULTED: &str = "(consulted API documentation index)";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Only accept overloads whose parameter count fits the call.
    pub arity: bool,
    /// Flag `new X()` when `X` matches no class in the oracle at all.
    pub phantom_types: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    Atomic,
    ScopeBound,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all_fields = "camelCase")]
pub enum FindingKind {
    /// A constant, static member or nested class that does not exist. A
    /// missing `class` means the symbol is itself an unknown class name.
    PhantomSymbol { class: Option<QualifiedName>, member: String },
    PhantomMember { method: String, on_type: QualifiedName },
    BrokenChain { method: String, on_type: QualifiedName },
}

impl FindingKind {
    pub fn name(&self) -> &'static str {
        match self {
            FindingKind::PhantomSymbol { .. } => "PhantomSymbol",
            FindingKind::PhantomMember { .. } => "PhantomMember",
            FindingKind::BrokenChain { .. } => "BrokenChain",
        }
    }

    /// The missing member or method.
    pub fn symbol(&self) -> &str {
        match self {
            FindingKind::PhantomSymbol { member, .. } => member,
            FindingKind::PhantomMember { method, .. } | FindingKind::BrokenChain { method, .. } => method,
        }
    }

    /// The type that was consulted.
    pub fn on_type(&self) -> Option<&QualifiedName> {
        match self {
            FindingKind::PhantomSymbol { class, .. } => class.as_ref(),
            FindingKind::PhantomMember { on_type, .. } | FindingKind::BrokenChain { on_type, .. } => Some(on_type),
        }
    }

    pub fn tier(&self) -> Tier {
        match self {
            FindingKind::PhantomSymbol { .. } => Tier::Atomic,
            _ => Tier::ScopeBound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl From<Span> for Location {
    fn from(s: Span) -> Self {
        Location { line: s.line, column: s.col }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Finding {
    // Field order gives the report order: by location, then kind.
    pub location: Location,
    #[serde(flatten)]
    pub kind: FindingKind,
    pub tier: Tier,
    pub explanation: String,
}

impl Finding {
    pub fn new(kind: FindingKind, location: Location) -> Self {
        let explanation = explain(&kind, None);
        Finding { tier: kind.tier(), kind, location, explanation }
    }

    fn with_arity(kind: FindingKind, location: Location, arity: usize) -> Self {
        let explanation = explain(&kind, Some(arity));
        Finding { tier: kind.tier(), kind, location, explanation }
    }
}

fn explain(kind: &FindingKind, arity: Option<usize>) -> String {
    match kind {
        FindingKind::PhantomSymbol { class: Some(c), member } => {
            format!("`{member}` is not a member of `{c}` {CONSULTED}")
        }
        FindingKind::PhantomSymbol { class: None, member } => {
            format!("`{member}` is not a member of any package {CONSULTED}")
        }
        FindingKind::PhantomMember { method, on_type } => match arity {
            Some(n) => format!(
                "`{method}` taking {n} argument{} is not a member of `{on_type}` {CONSULTED}",
                if n == 1 { "" } else { "s" }
            ),
            None => format!("`{method}` is not a member of `{on_type}` {CONSULTED}"),
        },
        FindingKind::BrokenChain { method, on_type } => {
            format!("`{method}` returns void on `{on_type}` but the chain continues {CONSULTED}")
        }
    }
}

/// Unit counts for one check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Census {
    pub units_checked: usize,
    pub units_skipped: usize,
    pub atomic_checked: usize,
    pub chains_checked: usize,
    /// Chains whose walk halted before the last call.
    pub unresolved: usize,
}

/// Result of checking one snippet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub findings: Vec<Finding>,
    pub diagnostics: Vec<Diagnostic>,
    pub census: Census,
}

/// Where a chain walk stands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierState {
    pub current_type: QualifiedName,
    pub position: usize,
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainOutcome {
    /// The root type is not in the oracle; nothing was checked.
    Skipped,
    /// Every call was found. `result` is the class the chain evaluates to,
    /// when that is a class.
    Complete { result: Option<QualifiedName> },
    /// The oracle could not decide call `at`; no finding.
    Halted { at: usize, state: VerifierState },
    /// Call `at` is not a member of `on_type`. `arity_mismatch` means the
    /// name exists but no overload takes that many arguments.
    Phantom { at: usize, on_type: QualifiedName, arity_mismatch: bool },
    /// Call `at` returns void and is not the last call.
    Broken { at: usize, on_type: QualifiedName },
}

/// Absence of `member` on `entry` is only provable when every supertype
/// outside the oracle is `java.lang.Object` and `member` is not one of the
/// methods such an Object would contribute.
pub fn absence_provable(entry: &ClassEntry, member: &str) -> bool {
    let external = entry.external_supertypes();
    let only_object = external.iter().all(|e| e.as_str() == JAVA_LANG_OBJECT);
    only_object && !(!external.is_empty() && OBJECT_METHODS.contains(&member))
}

/// Walks `calls` starting from `start`.
pub fn walk_chain(table: &SymbolTable, start: &QualifiedName, calls: &[ChainCall], arity: bool) -> ChainOutcome {
    if !table.contains_class(start) {
        return ChainOutcome::Skipped;
    }
    let mut state = VerifierState { current_type: start.clone(), position: 0, halted: false };
    let n = calls.len();
    for (i, call) in calls.iter().enumerate() {
        state.position = i;
        let Ok(entry) = table.entry(&state.current_type) else {
            state.halted = true;
            return ChainOutcome::Halted { at: i, state };
        };
        let all = table.lookup_member(&state.current_type, &call.method, None).unwrap_or_default();
        let sigs: Vec<_> = if arity { all.iter().filter(|s| s.accepts_arity(call.arg_count)).collect() } else { all.iter().collect() };
        if sigs.is_empty() {
            if !absence_provable(entry, &call.method) {
                state.halted = true;
                return ChainOutcome::Halted { at: i, state };
            }
            return ChainOutcome::Phantom { at: i, on_type: state.current_type, arity_mismatch: !all.is_empty() };
        }
        let returns: BTreeSet<&ReturnType> = sigs.iter().map(|s| &s.ret).collect();
        if returns.len() > 1 {
            state.halted = true;
            return ChainOutcome::Halted { at: i, state };
        }
        let last = i + 1 == n;
        match returns.into_iter().next().expect("non-empty") {
            ReturnType::Void if last => return ChainOutcome::Complete { result: None },
            ReturnType::Void => return ChainOutcome::Broken { at: i, on_type: state.current_type },
            ReturnType::Value(t) => match t.as_class() {
                // `Object` is what erased generics return; following it
                // would report members of the real type as missing.
                Some(q) if q.as_str() != JAVA_LANG_OBJECT => state.current_type = q,
                _ if last => return ChainOutcome::Complete { result: None },
                _ => {
                    state.position = i + 1;
                    state.halted = true;
                    return ChainOutcome::Halted { at: i + 1, state };
                }
            },
        }
    }
    ChainOutcome::Complete { result: Some(state.current_type) }
}

enum AtomicOutcome {
    Skipped,
    Present,
    Absent,
}

fn check_atomic(class: &QualifiedName, member: &str, table: &SymbolTable) -> AtomicOutcome {
    let Ok(entry) = table.entry(class) else {
        return AtomicOutcome::Skipped;
    };
    let present = entry.constants().any(|c| c == member)
        || entry.method_names().any(|m| m == member)
        || entry.has_nested(member);
    if present || !absence_provable(entry, member) {
        AtomicOutcome::Present
    } else {
        AtomicOutcome::Absent
    }
}

/// Phase 1 for one atomic unit. Unknown classes and non-atomic units give
/// no finding.
pub fn verify_atomic(unit: &CheckUnit, table: &SymbolTable) -> Option<Finding> {
    let UnitKind::AtomicSymbol { class, member } = &unit.kind else { return None };
    match check_atomic(class, &member.name, table) {
        AtomicOutcome::Absent => Some(Finding::new(
            FindingKind::PhantomSymbol { class: Some(class.clone()), member: member.name.clone() },
            member.span.into(),
        )),
        _ => None,
    }
}

/// Phase 2 for one invocation unit: at most one finding, for the leftmost
/// failure.
pub fn verify_chain(
    unit: &CheckUnit,
    scope: &crate::extract::ScopeMap,
    table: &SymbolTable,
    arity: bool,
) -> Vec<Finding> {
    let Some((root, calls)) = unit.as_chain() else { return Vec::new() };
    let Some(start) = root.root_type(scope) else { return Vec::new() };
    chain_finding(walk_chain(table, &start, calls, arity), calls).into_iter().collect()
}

fn chain_finding(outcome: ChainOutcome, calls: &[ChainCall]) -> Option<Finding> {
    match outcome {
        ChainOutcome::Phantom { at, on_type, arity_mismatch } => {
            let call = &calls[at];
            let kind = FindingKind::PhantomMember { method: call.method.clone(), on_type };
            Some(if arity_mismatch {
                Finding::with_arity(kind, call.span.into(), call.arg_count)
            } else {
                Finding::new(kind, call.span.into())
            })
        }
        ChainOutcome::Broken { at, on_type } => {
            let call = &calls[at];
            Some(Finding::new(FindingKind::BrokenChain { method: call.method.clone(), on_type }, call.span.into()))
        }
        _ => None,
    }
}

/// Parses, extracts and verifies one snippet.
pub fn check_snippet(snippet: &Snippet, table: &SymbolTable, options: CheckOptions) -> Report {
    let tree = parse_snippet(&snippet.source);
    let imports = effective_imports(&tree, &snippet.imports);
    let scope = build_scope(&tree, table, &imports);
    let units = extract_units(&tree, &scope, table, &imports);

    let mut census = Census::default();
    let mut findings = Vec::new();
    for unit in &units {
        match &unit.kind {
            UnitKind::AtomicSymbol { class, member } => match check_atomic(class, &member.name, table) {
                AtomicOutcome::Skipped => census.units_skipped += 1,
                outcome => {
                    census.atomic_checked += 1;
                    if matches!(outcome, AtomicOutcome::Absent) {
                        findings.push(Finding::new(
                            FindingKind::PhantomSymbol { class: Some(class.clone()), member: member.name.clone() },
                            member.span.into(),
                        ));
                    }
                }
            },
            UnitKind::UnknownType { name } => {
                if options.phantom_types {
                    census.atomic_checked += 1;
                    findings.push(Finding::new(
                        FindingKind::PhantomSymbol { class: None, member: name.name.clone() },
                        name.span.into(),
                    ));
                }
            }
            UnitKind::SingleCall { .. } | UnitKind::Chain { .. } => {
                let (root, calls) = unit.as_chain().expect("invocation unit");
                let Some(start) = root.root_type(&scope) else {
                    census.units_skipped += 1;
                    continue;
                };
                let outcome = walk_chain(table, &start, calls, options.arity);
                match outcome {
                    ChainOutcome::Skipped => census.units_skipped += 1,
                    ChainOutcome::Halted { .. } => {
                        census.chains_checked += 1;
                        census.unresolved += 1;
                    }
                    other => {
                        census.chains_checked += 1;
                        findings.extend(chain_finding(other, calls));
                    }
                }
            }
        }
    }
    census.units_checked = census.atomic_checked + census.chains_checked;
    findings.sort();
    findings.dedup_by(|a, b| a.location == b.location && a.kind == b.kind);
    Report { findings, diagnostics: tree.diagnostics, census }
}
