//! Check units: the things the verifier tests against the oracle.

use super::ast::*;
use super::resolve::{dotted_path, Resolver};
use super::scope::ScopeMap;
use crate::oracle::{Import, QualifiedName, SymbolTable};

/// Where a chain starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootExpr {
    StaticClass(QualifiedName),
    Variable(Ident),
    Constructor(QualifiedName),
    /// `((T) expr).m()`: the cast fixes the receiver type.
    Cast(QualifiedName),
    Unresolvable(Unresolvable),
}

/// Why a root could not be classified. Such units are never verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unresolvable {
    /// Unqualified call, i.e. an implicit `this`.
    ImplicitReceiver,
    /// `this` or `super`.
    SelfReference,
    /// A name that is neither in scope nor a known class.
    UnboundName,
    /// The receiver reads a field; the oracle has no field types.
    FieldRead,
    /// Constructor or cast whose type did not resolve.
    UnknownType,
    AnonymousClass,
    /// Literals, array accesses and other expressions.
    Expression,
}

impl RootExpr {
    /// The starting type of the chain, if known.
    pub fn root_type(&self, scope: &ScopeMap) -> Option<QualifiedName> {
        match self {
            RootExpr::StaticClass(q) | RootExpr::Constructor(q) | RootExpr::Cast(q) => Some(q.clone()),
            RootExpr::Variable(id) => scope.type_at(&id.name, id.span.start).cloned(),
            RootExpr::Unresolvable(_) => None,
        }
    }
}

/// One invocation in a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCall {
    pub method: String,
    pub arg_count: usize,
    /// Span of the method name.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitKind {
    /// `Class.MEMBER` read directly off a class.
    AtomicSymbol { class: QualifiedName, member: Ident },
    SingleCall { receiver: RootExpr, call: ChainCall },
    Chain { root: RootExpr, calls: Vec<ChainCall> },
    /// `new X(..)` where `X` matches no class of any package.
    UnknownType { name: Ident },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckUnit {
    pub kind: UnitKind,
    pub location: Span,
}

impl CheckUnit {
    /// Root and calls for invocation units; a single call is a chain of one.
    pub fn as_chain(&self) -> Option<(&RootExpr, &[ChainCall])> {
        match &self.kind {
            UnitKind::SingleCall { receiver, call } => Some((receiver, std::slice::from_ref(call))),
            UnitKind::Chain { root, calls } => Some((root, calls)),
            _ => None,
        }
    }
}

/// Splits a call expression into its leftmost non-call receiver and the
/// calls applied to it, left to right. Non-call expressions give no calls.
pub fn decompose(expr: &Expr) -> (Option<&Expr>, Vec<ChainCall>) {
    let (root, calls) = decompose_with_args(expr);
    (root, calls.into_iter().map(|(c, _)| c).collect())
}

fn decompose_with_args(expr: &Expr) -> (Option<&Expr>, Vec<(ChainCall, &[Expr])>) {
    let mut calls = Vec::new();
    let mut cur = expr;
    let root = loop {
        match &cur.kind {
            ExprKind::Call { receiver, name, args } => {
                calls.push((ChainCall { method: name.name.clone(), arg_count: args.len(), span: name.span }, args.as_slice()));
                match receiver {
                    Some(r) => cur = r,
                    None => break None,
                }
            }
            _ => break Some(cur),
        }
    };
    calls.reverse();
    (root, calls)
}

/// Classifies the receiver at the bottom of a chain. `None` is an implicit
/// receiver.
pub fn classify_root(receiver: Option<&Expr>, scope: &ScopeMap, table: &SymbolTable, imports: &[Import]) -> RootExpr {
    classify(receiver, scope, Resolver::new(table, imports))
}

fn classify(receiver: Option<&Expr>, scope: &ScopeMap, resolver: Resolver<'_>) -> RootExpr {
    let Some(expr) = receiver else {
        return RootExpr::Unresolvable(Unresolvable::ImplicitReceiver);
    };
    match &expr.kind {
        ExprKind::Paren(inner) => classify(Some(inner), scope, resolver),
        ExprKind::Name(_) | ExprKind::FieldAccess { .. } => {
            let Some(path) = dotted_path(expr) else {
                return RootExpr::Unresolvable(Unresolvable::FieldRead);
            };
            let head = path[0];
            if scope.lookup(&head.name, head.span.start).is_some() {
                return if path.len() == 1 {
                    RootExpr::Variable(head.clone())
                } else {
                    RootExpr::Unresolvable(Unresolvable::FieldRead)
                };
            }
            let segs: Vec<&str> = path.iter().map(|i| i.name.as_str()).collect();
            match resolver.class_prefix(&segs) {
                Some((q, used)) if used == segs.len() => RootExpr::StaticClass(q),
                Some(_) => RootExpr::Unresolvable(Unresolvable::FieldRead),
                None => RootExpr::Unresolvable(Unresolvable::UnboundName),
            }
        }
        ExprKind::New { body: Some(_), .. } => RootExpr::Unresolvable(Unresolvable::AnonymousClass),
        ExprKind::New { ty, outer: None, .. } => match resolver.resolve_type(ty) {
            Some(q) => RootExpr::Constructor(q),
            None => RootExpr::Unresolvable(Unresolvable::UnknownType),
        },
        ExprKind::Cast { ty, .. } => match resolver.resolve_type(ty) {
            Some(q) => RootExpr::Cast(q),
            None => RootExpr::Unresolvable(Unresolvable::UnknownType),
        },
        ExprKind::This | ExprKind::Super => RootExpr::Unresolvable(Unresolvable::SelfReference),
        _ => RootExpr::Unresolvable(Unresolvable::Expression),
    }
}

/// Extracts every check unit from `tree`, in source order.
///
/// Each maximal call chain is one unit; calls nested in arguments and in
/// the root expression are units of their own. Field reads off a class
/// become atomic units, as do static single-type imports of members.
pub fn extract_units(tree: &SyntaxTree, scope: &ScopeMap, table: &SymbolTable, imports: &[Import]) -> Vec<CheckUnit> {
    let mut x = Extractor { resolver: Resolver::new(table, imports), scope, units: Vec::new() };
    for decl in &tree.imports {
        x.static_import(decl);
    }
    for item in &tree.items {
        x.visit_item(item);
    }
    x.units.sort_by_key(|u| (u.location.start, u.location.end));
    x.units
}

struct Extractor<'a> {
    resolver: Resolver<'a>,
    scope: &'a ScopeMap,
    units: Vec<CheckUnit>,
}

impl Extractor<'_> {
    fn static_import(&mut self, decl: &ImportDecl) {
        let import = &decl.import;
        if !import.is_static || import.wildcard {
            return;
        }
        let Some(parent) = import.path.parent() else { return };
        let segs: Vec<&str> = parent.split('.').collect();
        if let Some((class, used)) = self.resolver.class_prefix(&segs) {
            if used == segs.len() {
                let member = Ident { name: import.path.simple_name().to_string(), span: decl.span };
                self.units.push(CheckUnit { kind: UnitKind::AtomicSymbol { class, member }, location: decl.span });
            }
        }
    }

    fn path_units(&mut self, path: &[&Ident]) {
        let head = path[0];
        if self.scope.lookup(&head.name, head.span.start).is_some() {
            return;
        }
        let segs: Vec<&str> = path.iter().map(|i| i.name.as_str()).collect();
        if let Some((class, used)) = self.resolver.class_prefix(&segs) {
            if used < segs.len() {
                let member = path[used].clone();
                let location = member.span;
                self.units.push(CheckUnit { kind: UnitKind::AtomicSymbol { class, member }, location });
            }
        }
    }

    fn constructor_type_units(&mut self, ty: &TypeRef) {
        if ty.primitive || ty.segments.is_empty() {
            return;
        }
        let segs: Vec<&str> = ty.segments.iter().map(|s| s.name.as_str()).collect();
        match self.resolver.class_prefix(&segs) {
            Some((class, used)) if used < segs.len() && self.resolver.table.contains_class(&class) => {
                let member = ty.segments[used].clone();
                let location = member.span;
                self.units.push(CheckUnit { kind: UnitKind::AtomicSymbol { class, member }, location });
            }
            Some(_) => {}
            None => {
                let first = &ty.segments[0];
                let looks_like_class = first.name.starts_with(|c: char| c.is_uppercase());
                if looks_like_class && self.resolver.table.classes_named(&first.name).next().is_none() {
                    self.units.push(CheckUnit { kind: UnitKind::UnknownType { name: first.clone() }, location: first.span });
                }
            }
        }
    }
}

impl Visit for Extractor<'_> {
    fn visit_expr(&mut self, expr: &Expr) {
        match &expr.kind {
            ExprKind::Call { .. } => {
                let (root, calls) = decompose_with_args(expr);
                let receiver = classify(root, self.scope, self.resolver);
                let mut plain: Vec<ChainCall> = calls.iter().map(|(c, _)| c.clone()).collect();
                let kind = if plain.len() == 1 {
                    UnitKind::SingleCall { receiver, call: plain.pop().expect("one call") }
                } else {
                    UnitKind::Chain { root: receiver, calls: plain }
                };
                self.units.push(CheckUnit { kind, location: expr.span });
                if let Some(r) = root {
                    self.visit_expr(r);
                }
                for (_, args) in calls {
                    for a in args {
                        self.visit_expr(a);
                    }
                }
            }
            ExprKind::Name(_) | ExprKind::FieldAccess { .. } => match dotted_path(expr) {
                Some(path) => self.path_units(&path),
                None => walk_expr(self, expr),
            },
            ExprKind::New { ty, outer: None, .. } => {
                self.constructor_type_units(ty);
                walk_expr(self, expr);
            }
            _ => walk_expr(self, expr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{build_scope, parse_snippet};
    use crate::oracle::{build_table, parse_spec};

    fn table() -> SymbolTable {
        build_table(
            &parse_spec(
                br#"<api>
                <class name="android/media/AudioAttributes"><field name="CONTENT_TYPE_MUSIC"/></class>
                <class name="android/media/AudioAttributes$Builder"/>
                <class name="android/media/AudioManager"><field name="STREAM_MUSIC"/></class>
                <class name="android/media/MediaPlayer"/>
            </api>"#,
            )
            .unwrap(),
        )
    }

    fn units(src: &str) -> Vec<CheckUnit> {
        let t = table();
        let tree = parse_snippet(src);
        let mut imports: Vec<Import> = tree.imports.iter().map(|i| i.import.clone()).collect();
        imports.push(Import::wildcard("android.media"));
        let scope = build_scope(&tree, &t, &imports);
        extract_units(&tree, &scope, &t, &imports)
    }

    fn q(s: &str) -> QualifiedName {
        QualifiedName::new(s)
    }

    #[test]
    fn atomic_symbol() {
        let u = units("x = AudioAttributes.CONTENT_TYPE_STREAM;");
        assert_eq!(u.len(), 1);
        let UnitKind::AtomicSymbol { class, member } = &u[0].kind else { panic!() };
        assert_eq!(class, &q("android.media.AudioAttributes"));
        assert_eq!(member.name, "CONTENT_TYPE_STREAM");
    }

    #[test]
    fn constructor_chain_in_order() {
        let u = units("new AudioAttributes.Builder().setStreamType(X).setContentType(Y).build();");
        let (root, calls) = u[0].as_chain().unwrap();
        assert_eq!(root, &RootExpr::Constructor(q("android.media.AudioAttributes.Builder")));
        let names: Vec<(&str, usize)> = calls.iter().map(|c| (c.method.as_str(), c.arg_count)).collect();
        assert_eq!(names, [("setStreamType", 1), ("setContentType", 1), ("build", 0)]);
    }

    #[test]
    fn nested_arguments_are_separate_units() {
        let u = units("f(g(x));");
        assert_eq!(u.len(), 2);
        let names: Vec<&str> = u.iter().map(|u| u.as_chain().unwrap().1[0].method.as_str()).collect();
        assert_eq!(names, ["f", "g"]);
        assert!(u.iter().all(|u| u.as_chain().unwrap().0 == &RootExpr::Unresolvable(Unresolvable::ImplicitReceiver)));
    }

    #[test]
    fn root_classification() {
        let src = "MediaPlayer mediaPlayer = make();\nmediaPlayer.start();\nsomeUnknownVar.go();\nAudioManager.STREAM_MUSIC.hashCode();\nAudioManager.get();\n((MediaPlayer) o).start();\n\"s\".length();\nthis.run();";
        let roots: Vec<RootExpr> = units(src)
            .iter()
            .filter_map(|u| u.as_chain().map(|(r, _)| r.clone()))
            .collect();
        assert_eq!(roots.len(), 8);
        assert_eq!(roots[0], RootExpr::Unresolvable(Unresolvable::ImplicitReceiver));
        assert!(matches!(&roots[1], RootExpr::Variable(id) if id.name == "mediaPlayer"));
        assert_eq!(roots[2], RootExpr::Unresolvable(Unresolvable::UnboundName));
        assert_eq!(roots[3], RootExpr::Unresolvable(Unresolvable::FieldRead));
        assert_eq!(roots[4], RootExpr::StaticClass(q("android.media.AudioManager")));
        assert_eq!(roots[5], RootExpr::Cast(q("android.media.MediaPlayer")));
        assert_eq!(roots[6], RootExpr::Unresolvable(Unresolvable::Expression));
        assert_eq!(roots[7], RootExpr::Unresolvable(Unresolvable::SelfReference));
    }

    #[test]
    fn field_read_splits_chain() {
        let u = units("MediaPlayer p = x;\np.a().f.g();");
        let chains: Vec<_> = u.iter().filter_map(|u| u.as_chain()).collect();
        assert_eq!(chains.len(), 2);
        assert!(matches!(chains.iter().find(|(_, c)| c[0].method == "a").unwrap().0, RootExpr::Variable(_)));
        assert_eq!(chains.iter().find(|(_, c)| c[0].method == "g").unwrap().0, &RootExpr::Unresolvable(Unresolvable::FieldRead));
    }

    #[test]
    fn variables_shadow_classes() {
        let u = units("String AudioManager = s;\nAudioManager.length();\nx = AudioManager.STREAM_MUSIC;");
        assert!(matches!(u[0].as_chain().unwrap().0, RootExpr::Variable(_)));
        assert_eq!(u.len(), 1);
    }

    #[test]
    fn phantom_nested_and_unknown_types() {
        let u = units("new AudioAttributes.Bilder();\nnew AudioAttribute.Builder();\nnew MyWidget();");
        let kinds: Vec<&UnitKind> = u.iter().map(|u| &u.kind).collect();
        assert!(kinds.iter().any(|k| matches!(k, UnitKind::AtomicSymbol { member, .. } if member.name == "Bilder")));
        assert!(kinds.iter().any(|k| matches!(k, UnitKind::UnknownType { name } if name.name == "AudioAttribute")));
        assert!(kinds.iter().any(|k| matches!(k, UnitKind::UnknownType { name } if name.name == "MyWidget")));
    }

    #[test]
    fn static_import_is_atomic() {
        let u = units("import static android.media.AudioManager.STREAM_MUSIC;\nimport static android.media.AudioManager.NOPE;");
        assert_eq!(u.len(), 2);
        assert!(u.iter().all(|u| matches!(&u.kind, UnitKind::AtomicSymbol { class, .. } if class == &q("android.media.AudioManager"))));
    }

    #[test]
    fn empty_snippet_has_no_units() {
        assert!(units("").is_empty());
    }
}
