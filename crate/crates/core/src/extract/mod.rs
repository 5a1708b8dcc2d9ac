//! Snippet parsing and check-unit extraction.

pub mod ast;
pub mod lexer;
mod parser;
mod resolve;
mod scope;
mod units;

use serde::{Deserialize, Serialize};

use crate::oracle::Import;

pub use parser::parse_snippet;
pub use scope::{build_scope, Binding, ScopeMap};
pub use units::{classify_root, decompose, extract_units, ChainCall, CheckUnit, RootExpr, UnitKind, Unresolvable};

/// A piece of source to check, with imports supplied from outside it
/// (for instance from the file the patch is meant to go into).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub source: String,
    #[serde(default)]
    pub imports: Vec<Import>,
    #[serde(default)]
    pub origin: Option<String>,
}

impl Snippet {
    pub fn new(source: impl Into<String>) -> Self {
        Snippet { source: source.into(), ..Default::default() }
    }

    pub fn with_imports(mut self, imports: impl IntoIterator<Item = Import>) -> Self {
        self.imports.extend(imports);
        self
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }
}

/// The snippet's own imports followed by the externally supplied ones.
pub fn effective_imports(tree: &ast::SyntaxTree, extra: &[Import]) -> Vec<Import> {
    let mut out: Vec<Import> = tree.imports.iter().map(|d| d.import.clone()).collect();
    for i in extra {
        if !out.contains(i) {
            out.push(i.clone());
        }
    }
    out
}

/// Imports declared in a source file, e.g. the legacy file a patch targets.
pub fn imports_of(source: &str) -> Vec<Import> {
    effective_imports(&parse_snippet(source), &[])
}
