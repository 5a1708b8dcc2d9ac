//! Local variable → type bindings.

use super::ast::*;
use super::resolve::Resolver;
use super::units::{classify_root, decompose};
use crate::oracle::{Import, QualifiedName, SymbolTable};
use crate::verify::{walk_chain, ChainOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    /// `None` when the declared or inferred type did not resolve.
    pub ty: Option<QualifiedName>,
    /// Byte range of the enclosing block, body or statement.
    pub scope_start: usize,
    pub scope_end: usize,
    /// Offset from which the name is in scope.
    pub visible_from: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScopeMap {
    bindings: Vec<Binding>,
}

impl ScopeMap {
    /// The binding `name` refers to at byte offset `at`: the innermost
    /// enclosing declaration, and among several in the same scope the
    /// latest one already visible.
    pub fn lookup(&self, name: &str, at: usize) -> Option<&Binding> {
        self.bindings
            .iter()
            .filter(|b| b.name == name && b.scope_start <= at && at < b.scope_end && b.visible_from <= at)
            .max_by_key(|b| (b.scope_start, std::cmp::Reverse(b.scope_end), b.visible_from))
    }

    pub fn type_at(&self, name: &str, at: usize) -> Option<&QualifiedName> {
        self.lookup(name, at)?.ty.as_ref()
    }

    /// The most recently declared binding of `name`, wherever it is.
    pub fn last(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().rev().find(|b| b.name == name)
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// Collects every variable, field, parameter and pattern binding in `tree`.
///
/// A declared type wins when it resolves. `var` declarations take the type
/// of a constructor, a cast, or a call chain that propagates cleanly
/// through the oracle; anything else is left unresolved.
pub fn build_scope(tree: &SyntaxTree, table: &SymbolTable, imports: &[Import]) -> ScopeMap {
    let mut b = Builder { resolver: Resolver::new(table, imports), map: ScopeMap::default(), scopes: vec![(0, tree.len + 1)] };
    for item in &tree.items {
        if let Item::Member(Member::Field(var)) = item {
            b.bind_declared(var, 0);
        }
    }
    for item in &tree.items {
        b.visit_item(item);
    }
    b.map
}

struct Builder<'a> {
    resolver: Resolver<'a>,
    map: ScopeMap,
    scopes: Vec<(usize, usize)>,
}

impl Builder<'_> {
    fn bind(&mut self, name: &Ident, ty: Option<QualifiedName>, visible_from: usize) {
        let (scope_start, scope_end) = *self.scopes.last().expect("root scope");
        self.map.bindings.push(Binding { name: name.name.clone(), ty, scope_start, scope_end, visible_from });
    }

    fn bind_declared(&mut self, var: &LocalVar, visible_from: usize) {
        for d in &var.declarators {
            let ty = if d.dims > 0 {
                None
            } else if var.ty.is_var() {
                d.init.as_ref().and_then(|e| self.infer(e))
            } else {
                self.resolver.resolve_type(&var.ty)
            };
            self.bind(&d.name, ty, visible_from);
        }
    }

    fn bind_param(&mut self, p: &Param, visible_from: usize) {
        let ty = p.ty.as_ref().and_then(|t| self.resolver.resolve_type(t));
        self.bind(&p.name, ty, visible_from);
    }

    fn scoped(&mut self, span: Span, f: impl FnOnce(&mut Self)) {
        self.scopes.push((span.start, span.end));
        f(self);
        self.scopes.pop();
    }

    fn infer(&self, expr: &Expr) -> Option<QualifiedName> {
        match &expr.kind {
            ExprKind::Paren(inner) => self.infer(inner),
            ExprKind::New { ty, body: None, outer: None, .. } => self.resolver.resolve_type(ty),
            ExprKind::Cast { ty, .. } => self.resolver.resolve_type(ty),
            ExprKind::Name(id) => self.map.type_at(&id.name, id.span.start).cloned(),
            ExprKind::Call { .. } => {
                let (receiver, calls) = decompose(expr);
                let root = classify_root(receiver, &self.map, self.resolver.table, self.resolver.imports);
                let start = root.root_type(&self.map)?;
                match walk_chain(self.resolver.table, &start, &calls, false) {
                    ChainOutcome::Complete { result } => result,
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

impl Visit for Builder<'_> {
    fn visit_type_decl(&mut self, decl: &TypeDecl) {
        self.scoped(decl.span, |b| {
            for p in &decl.record_params {
                b.bind_param(p, decl.span.start);
            }
            for m in &decl.members {
                if let Member::Field(var) = m {
                    b.bind_declared(var, decl.span.start);
                }
            }
            walk_type_decl(b, decl);
        });
    }

    fn visit_member(&mut self, member: &Member) {
        match member {
            Member::Method(m) => self.scoped(m.span, |b| {
                for p in &m.params {
                    b.bind_param(p, m.span.start);
                }
                walk_member(b, member);
            }),
            _ => walk_member(self, member),
        }
    }

    fn visit_block(&mut self, block: &Block) {
        self.scoped(block.span, |b| walk_block(b, block));
    }

    fn visit_stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::LocalVar(var) => {
                walk_local_var(self, var);
                self.bind_declared(var, var.span.end);
            }
            StmtKind::For { .. } => self.scoped(stmt.span, |b| walk_stmt(b, stmt)),
            StmtKind::ForEach { var, iter, body } => self.scoped(stmt.span, |b| {
                b.visit_expr(iter);
                let ty = if var.ty.is_var() { None } else { b.resolver.resolve_type(&var.ty) };
                b.bind(&var.declarators[0].name, ty, var.span.end);
                b.visit_stmt(body);
            }),
            StmtKind::Try { resources, body, catches, finally } => self.scoped(stmt.span, |b| {
                for r in resources {
                    b.visit_stmt(r);
                }
                b.visit_block(body);
                for c in catches {
                    b.scoped(c.body.span, |b| {
                        let ty = match c.types.as_slice() {
                            [one] => b.resolver.resolve_type(one),
                            _ => None,
                        };
                        b.bind(&c.name, ty, c.body.span.start);
                        walk_block(b, &c.body);
                    });
                }
                if let Some(f) = finally {
                    b.visit_block(f);
                }
            }),
            _ => walk_stmt(self, stmt),
        }
    }

    fn visit_switch(&mut self, switch: &SwitchBlock) {
        self.visit_expr(&switch.selector);
        self.scoped(switch.span, |b| {
            for case in &switch.cases {
                b.scoped(case.span, |b| {
                    for p in &case.patterns {
                        b.bind_param(p, case.span.start);
                    }
                    for l in &case.labels {
                        b.visit_expr(l);
                    }
                    if let Some(g) = &case.guard {
                        b.visit_expr(g);
                    }
                    // Declarations in `case X:` bodies belong to the whole switch.
                    b.scopes.pop();
                    for s in &case.body {
                        b.visit_stmt(s);
                    }
                    b.scopes.push((case.span.start, case.span.end));
                });
            }
        });
    }

    fn visit_expr(&mut self, expr: &Expr) {
        match &expr.kind {
            ExprKind::Lambda { params, .. } => self.scoped(expr.span, |b| {
                for p in params {
                    b.bind_param(p, expr.span.start);
                }
                walk_expr(b, expr);
            }),
            ExprKind::InstanceOf { ty, binding: Some(id), .. } => {
                walk_expr(self, expr);
                let ty = self.resolver.resolve_type(ty);
                self.bind(id, ty, expr.span.end);
            }
            _ => walk_expr(self, expr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::parse_snippet;
    use crate::oracle::{build_table, parse_spec};

    fn table() -> SymbolTable {
        build_table(
            &parse_spec(
                br#"<api>
                <class name="java/lang/Object"><method name="toString()Ljava/lang/String;"/></class>
                <class name="java/lang/String"/>
                <class name="android/media/AudioAttributes"><field name="CONTENT_TYPE_MUSIC"/></class>
                <class name="android/media/AudioAttributes$Builder">
                    <method name="&lt;init&gt;()V"/>
                    <method name="setUsage(I)Landroid/media/AudioAttributes$Builder;"/>
                    <method name="build()Landroid/media/AudioAttributes;"/>
                </class>
            </api>"#,
            )
            .unwrap(),
        )
    }

    fn scope(src: &str) -> ScopeMap {
        let tree = parse_snippet(src);
        let imports: Vec<Import> = tree.imports.iter().map(|i| i.import.clone()).collect();
        build_scope(&tree, &table(), &imports)
    }

    fn ty<'a>(s: &'a ScopeMap, name: &str) -> Option<&'a str> {
        s.last(name).and_then(|b| b.ty.as_ref()).map(|q| q.as_str())
    }

    #[test]
    fn declared_type_with_import() {
        let s = scope("import android.media.AudioAttributes;\nAudioAttributes attr = make();\n");
        assert_eq!(ty(&s, "attr"), Some("android.media.AudioAttributes"));
    }

    #[test]
    fn unresolvable_declared_type() {
        let s = scope("Foo x = bar();");
        assert!(s.last("x").is_some());
        assert_eq!(ty(&s, "x"), None);
    }

    #[test]
    fn var_takes_constructor_type() {
        let s = scope("import android.media.AudioAttributes;\nvar b = new AudioAttributes.Builder();");
        assert_eq!(ty(&s, "b"), Some("android.media.AudioAttributes.Builder"));
    }

    #[test]
    fn var_takes_clean_chain_type() {
        let s = scope(
            "import android.media.AudioAttributes;\nvar a = new AudioAttributes.Builder().setUsage(1).build();\nvar c = new AudioAttributes.Builder().nope();\nvar d = (AudioAttributes) thing;",
        );
        assert_eq!(ty(&s, "a"), Some("android.media.AudioAttributes"));
        assert_eq!(ty(&s, "c"), None);
        assert_eq!(ty(&s, "d"), Some("android.media.AudioAttributes"));
    }

    #[test]
    fn innermost_and_latest_win() {
        let src = "String s = a;\n{ AudioAttributes s = b; s.x(); }\ns.y();";
        let tree = parse_snippet(src);
        let s = build_scope(&tree, &table(), &[Import::wildcard("android.media")]);
        let inner = src.find("s.x").unwrap();
        let outer = src.find("s.y").unwrap();
        assert_eq!(s.type_at("s", inner).unwrap().as_str(), "android.media.AudioAttributes");
        assert_eq!(s.type_at("s", outer).unwrap().as_str(), "java.lang.String");
        assert!(s.lookup("s", 0).is_none());
    }

    #[test]
    fn fields_and_params_cover_their_bodies() {
        let src = "class A {\n void f(String p) { p.length(); q.length(); }\n String q;\n}";
        let tree = parse_snippet(src);
        let s = build_scope(&tree, &table(), &[]);
        assert!(s.lookup("p", src.find("p.length").unwrap()).is_some());
        assert!(s.lookup("q", src.find("q.length").unwrap()).is_some());
        assert!(s.lookup("p", src.len()).is_none());
    }

    #[test]
    fn lambda_catch_foreach_and_patterns() {
        let src = "list.forEach((String x) -> x.trim());\ntry { } catch (String e) { e.trim(); }\nfor (String it : items) it.trim();\nif (o instanceof String str) str.trim();";
        let tree = parse_snippet(src);
        let s = build_scope(&tree, &table(), &[]);
        for name in ["x", "e", "it", "str"] {
            let at = src.find(&format!("{name}.trim")).unwrap();
            assert_eq!(s.type_at(name, at).map(|q| q.as_str()), Some("java.lang.String"), "{name}");
        }
    }
}
