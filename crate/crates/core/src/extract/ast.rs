//! Concrete syntax tree for the Java subset the extractor needs.

use serde::{Deserialize, Serialize};

use crate::oracle::Import;

/// Source region: byte range plus the 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end.max(self.end), ..self }
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeRef {
    /// Dotted name segments, e.g. `["AudioAttributes", "Builder"]`.
    pub segments: Vec<Ident>,
    /// Type arguments of any segment, flattened. Wildcards are dropped.
    pub args: Vec<TypeRef>,
    pub dims: u32,
    pub primitive: bool,
    pub span: Span,
}

impl TypeRef {
    pub fn dotted(&self) -> String {
        self.segments.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(".")
    }

    pub fn is_var(&self) -> bool {
        !self.primitive && self.dims == 0 && self.segments.len() == 1 && self.segments[0].name == "var"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(Ident),
    FieldAccess { target: Box<Expr>, name: Ident },
    Call { receiver: Option<Box<Expr>>, name: Ident, args: Vec<Expr> },
    New { ty: TypeRef, args: Vec<Expr>, body: Option<Vec<Member>>, outer: Option<Box<Expr>> },
    NewArray { ty: TypeRef, dims: Vec<Expr>, init: Option<Vec<Expr>> },
    ArrayInit(Vec<Expr>),
    Cast { ty: TypeRef, expr: Box<Expr> },
    Paren(Box<Expr>),
    Literal,
    This,
    Super,
    ClassLit(TypeRef),
    Lambda { params: Vec<Param>, body: LambdaBody },
    MethodRef { target: Box<Expr>, name: Ident },
    Index { target: Box<Expr>, index: Box<Expr> },
    Unary { op: String, expr: Box<Expr> },
    Binary { op: String, lhs: Box<Expr>, rhs: Box<Expr> },
    Assign { op: String, lhs: Box<Expr>, rhs: Box<Expr> },
    Conditional { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
    InstanceOf { expr: Box<Expr>, ty: TypeRef, binding: Option<Ident> },
    Switch(Box<SwitchBlock>),
    /// A type used where an expression is expected, e.g. `String[]::new`.
    TypeExpr(TypeRef),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaBody {
    Expr(Box<Expr>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: Option<TypeRef>,
    pub name: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub name: Ident,
    pub dims: u32,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalVar {
    pub ty: TypeRef,
    pub declarators: Vec<Declarator>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catch {
    pub types: Vec<TypeRef>,
    pub name: Ident,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchBlock {
    pub selector: Expr,
    pub cases: Vec<SwitchCase>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchCase {
    pub labels: Vec<Expr>,
    /// Type-pattern label bindings, e.g. `case Foo f ->`.
    pub patterns: Vec<Param>,
    pub guard: Option<Expr>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Block(Block),
    LocalVar(LocalVar),
    LocalClass(TypeDecl),
    Expr(Expr),
    If { cond: Expr, then: Box<Stmt>, els: Option<Box<Stmt>> },
    While { cond: Expr, body: Box<Stmt> },
    DoWhile { body: Box<Stmt>, cond: Expr },
    For { init: Vec<Stmt>, cond: Option<Expr>, update: Vec<Expr>, body: Box<Stmt> },
    ForEach { var: LocalVar, iter: Expr, body: Box<Stmt> },
    Try { resources: Vec<Stmt>, body: Block, catches: Vec<Catch>, finally: Option<Block> },
    Switch(SwitchBlock),
    Return(Option<Expr>),
    Throw(Expr),
    Yield(Expr),
    Assert(Expr, Option<Expr>),
    Sync { lock: Expr, body: Block },
    Labeled { label: Ident, body: Box<Stmt> },
    Jump,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: Ident,
    /// `None` for constructors.
    pub ret: Option<TypeRef>,
    pub params: Vec<Param>,
    pub body: Option<Block>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumConstant {
    pub name: Ident,
    pub args: Vec<Expr>,
    pub body: Option<Vec<Member>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
    Record,
    Annotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub kind: TypeKind,
    pub name: Ident,
    pub supertypes: Vec<TypeRef>,
    pub record_params: Vec<Param>,
    pub enum_constants: Vec<EnumConstant>,
    pub members: Vec<Member>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Field(LocalVar),
    Method(MethodDecl),
    Initializer(Block),
    Type(TypeDecl),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Type(TypeDecl),
    Member(Member),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportDecl {
    pub import: Import,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticKind {
    SkippedRegion,
    UnterminatedBlock,
}

/// Parse result for one snippet. Parsing never fails; regions that could
/// not be parsed are reported in `diagnostics`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntaxTree {
    pub package: Option<String>,
    pub imports: Vec<ImportDecl>,
    pub items: Vec<Item>,
    pub diagnostics: Vec<Diagnostic>,
    pub len: usize,
}

impl SyntaxTree {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty() && self.imports.is_empty()
    }

    pub fn skipped_regions(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.kind == DiagnosticKind::SkippedRegion).count()
    }
}

/// Read-only traversal. Each hook defaults to visiting all children.
pub trait Visit {
    fn visit_item(&mut self, item: &Item) {
        walk_item(self, item)
    }
    fn visit_type_decl(&mut self, decl: &TypeDecl) {
        walk_type_decl(self, decl)
    }
    fn visit_member(&mut self, member: &Member) {
        walk_member(self, member)
    }
    fn visit_block(&mut self, block: &Block) {
        walk_block(self, block)
    }
    fn visit_stmt(&mut self, stmt: &Stmt) {
        walk_stmt(self, stmt)
    }
    fn visit_expr(&mut self, expr: &Expr) {
        walk_expr(self, expr)
    }
    fn visit_switch(&mut self, switch: &SwitchBlock) {
        walk_switch(self, switch)
    }
}

pub fn walk_item<V: Visit + ?Sized>(v: &mut V, item: &Item) {
    match item {
        Item::Type(decl) => v.visit_type_decl(decl),
        Item::Member(m) => v.visit_member(m),
        Item::Stmt(s) => v.visit_stmt(s),
    }
}

pub fn walk_type_decl<V: Visit + ?Sized>(v: &mut V, decl: &TypeDecl) {
    for c in &decl.enum_constants {
        for a in &c.args {
            v.visit_expr(a);
        }
        for m in c.body.iter().flatten() {
            v.visit_member(m);
        }
    }
    for m in &decl.members {
        v.visit_member(m);
    }
}

pub fn walk_member<V: Visit + ?Sized>(v: &mut V, member: &Member) {
    match member {
        Member::Field(var) => walk_local_var(v, var),
        Member::Method(m) => {
            if let Some(b) = &m.body {
                v.visit_block(b);
            }
        }
        Member::Initializer(b) => v.visit_block(b),
        Member::Type(t) => v.visit_type_decl(t),
    }
}

pub fn walk_local_var<V: Visit + ?Sized>(v: &mut V, var: &LocalVar) {
    for d in &var.declarators {
        if let Some(init) = &d.init {
            v.visit_expr(init);
        }
    }
}

pub fn walk_block<V: Visit + ?Sized>(v: &mut V, block: &Block) {
    for s in &block.stmts {
        v.visit_stmt(s);
    }
}

pub fn walk_switch<V: Visit + ?Sized>(v: &mut V, switch: &SwitchBlock) {
    v.visit_expr(&switch.selector);
    for case in &switch.cases {
        for l in &case.labels {
            v.visit_expr(l);
        }
        if let Some(g) = &case.guard {
            v.visit_expr(g);
        }
        for s in &case.body {
            v.visit_stmt(s);
        }
    }
}

pub fn walk_stmt<V: Visit + ?Sized>(v: &mut V, stmt: &Stmt) {
    match &stmt.kind {
        StmtKind::Block(b) => v.visit_block(b),
        StmtKind::LocalVar(var) => walk_local_var(v, var),
        StmtKind::LocalClass(t) => v.visit_type_decl(t),
        StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Yield(e) => v.visit_expr(e),
        StmtKind::If { cond, then, els } => {
            v.visit_expr(cond);
            v.visit_stmt(then);
            if let Some(e) = els {
                v.visit_stmt(e);
            }
        }
        StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
            v.visit_expr(cond);
            v.visit_stmt(body);
        }
        StmtKind::For { init, cond, update, body } => {
            for s in init {
                v.visit_stmt(s);
            }
            if let Some(c) = cond {
                v.visit_expr(c);
            }
            for u in update {
                v.visit_expr(u);
            }
            v.visit_stmt(body);
        }
        StmtKind::ForEach { var, iter, body } => {
            walk_local_var(v, var);
            v.visit_expr(iter);
            v.visit_stmt(body);
        }
        StmtKind::Try { resources, body, catches, finally } => {
            for r in resources {
                v.visit_stmt(r);
            }
            v.visit_block(body);
            for c in catches {
                v.visit_block(&c.body);
            }
            if let Some(f) = finally {
                v.visit_block(f);
            }
        }
        StmtKind::Switch(s) => v.visit_switch(s),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        StmtKind::Assert(c, m) => {
            v.visit_expr(c);
            if let Some(m) = m {
                v.visit_expr(m);
            }
        }
        StmtKind::Sync { lock, body } => {
            v.visit_expr(lock);
            v.visit_block(body);
        }
        StmtKind::Labeled { body, .. } => v.visit_stmt(body),
        StmtKind::Jump | StmtKind::Empty => {}
    }
}

pub fn walk_expr<V: Visit + ?Sized>(v: &mut V, expr: &Expr) {
    match &expr.kind {
        ExprKind::Name(_) | ExprKind::Literal | ExprKind::This | ExprKind::Super => {}
        ExprKind::ClassLit(_) | ExprKind::TypeExpr(_) => {}
        ExprKind::FieldAccess { target, .. } | ExprKind::MethodRef { target, .. } => v.visit_expr(target),
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                v.visit_expr(r);
            }
            for a in args {
                v.visit_expr(a);
            }
        }
        ExprKind::New { args, body, outer, .. } => {
            if let Some(o) = outer {
                v.visit_expr(o);
            }
            for a in args {
                v.visit_expr(a);
            }
            for m in body.iter().flatten() {
                v.visit_member(m);
            }
        }
        ExprKind::NewArray { dims, init, .. } => {
            for d in dims {
                v.visit_expr(d);
            }
            for i in init.iter().flatten() {
                v.visit_expr(i);
            }
        }
        ExprKind::ArrayInit(items) => {
            for i in items {
                v.visit_expr(i);
            }
        }
        ExprKind::Cast { expr, .. } | ExprKind::Paren(expr) | ExprKind::Unary { expr, .. } => v.visit_expr(expr),
        ExprKind::InstanceOf { expr, .. } => v.visit_expr(expr),
        ExprKind::Lambda { body, .. } => match body {
            LambdaBody::Expr(e) => v.visit_expr(e),
            LambdaBody::Block(b) => v.visit_block(b),
        },
        ExprKind::Index { target, index } => {
            v.visit_expr(target);
            v.visit_expr(index);
        }
        ExprKind::Binary { lhs, rhs, .. } | ExprKind::Assign { lhs, rhs, .. } => {
            v.visit_expr(lhs);
            v.visit_expr(rhs);
        }
        ExprKind::Conditional { cond, then, els } => {
            v.visit_expr(cond);
            v.visit_expr(then);
            v.visit_expr(els);
        }
        ExprKind::Switch(s) => v.visit_switch(s),
    }
}
