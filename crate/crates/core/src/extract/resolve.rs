//! Mapping source names onto oracle classes.

use super::ast::{Expr, ExprKind, Ident, TypeRef};
use crate::oracle::{Import, QualifiedName, SymbolTable};

#[derive(Clone, Copy)]
pub struct Resolver<'a> {
    pub table: &'a SymbolTable,
    pub imports: &'a [Import],
}

impl<'a> Resolver<'a> {
    pub fn new(table: &'a SymbolTable, imports: &'a [Import]) -> Self {
        Resolver { table, imports }
    }

    /// Longest prefix of a dotted path that names a class, with the number
    /// of segments it used.
    ///
    /// The first segment is tried as a simple name, then successively longer
    /// prefixes as fully qualified names; after that, further segments are
    /// taken while they name nested classes.
    pub fn class_prefix(&self, segs: &[&str]) -> Option<(QualifiedName, usize)> {
        let first = *segs.first()?;
        let (mut class, mut used) = match self.table.resolve_simple_name(first, self.imports) {
            Some(q) => (q, 1),
            None => (2..=segs.len()).find_map(|n| {
                let q = QualifiedName::new(segs[..n].join("."));
                self.table.contains_class(&q).then_some((q, n))
            })?,
        };
        if !self.table.contains_class(&class) {
            // Imported but absent from the oracle: its nested classes are
            // unknown too.
            return Some((class, used));
        }
        while used < segs.len() {
            let child = class.child(segs[used]);
            if !self.table.contains_class(&child) {
                break;
            }
            class = child;
            used += 1;
        }
        Some((class, used))
    }

    /// The class a written type denotes. Primitive and array types, and
    /// paths that do not fully resolve, give `None`.
    pub fn resolve_type(&self, ty: &TypeRef) -> Option<QualifiedName> {
        if ty.primitive || ty.dims > 0 || ty.is_var() {
            return None;
        }
        let segs: Vec<&str> = ty.segments.iter().map(|s| s.name.as_str()).collect();
        match self.class_prefix(&segs) {
            Some((q, used)) if used == segs.len() => Some(q),
            _ => None,
        }
    }
}

/// Identifiers of a pure dotted name expression (`a`, `a.b.c`), or `None`.
pub fn dotted_path(expr: &Expr) -> Option<Vec<&Ident>> {
    match &expr.kind {
        ExprKind::Name(id) => Some(vec![id]),
        ExprKind::FieldAccess { target, name } => {
            let mut path = dotted_path(target)?;
            path.push(name);
            Some(path)
        }
        _ => None,
    }
}
