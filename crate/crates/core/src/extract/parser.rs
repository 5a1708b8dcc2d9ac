//! Error-tolerant recursive-descent parser for Java snippets.
//!
//! A snippet may be a whole compilation unit, a bare list of members, or a
//! bare list of statements; all three are accepted, and mixed. When a
//! statement or member cannot be parsed the parser records a
//! [`DiagnosticKind::SkippedRegion`], skips to the end of the offending
//! line, and carries on with the next one.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::oracle::{Import, QualifiedName};

const MAX_DEPTH: u32 = 96;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp",
];

#[derive(Debug)]
struct Fail {
    pos: usize,
    msg: &'static str,
}

type PResult<T> = Result<T, Fail>;

/// Parses `src` into a syntax tree. Never fails.
pub fn parse_snippet(src: &str) -> SyntaxTree {
    let mut p = Parser { toks: tokenize(src), pos: 0, depth: 0, diagnostics: Vec::new() };
    let mut tree = SyntaxTree { len: src.len(), ..Default::default() };
    p.parse_unit(&mut tree);
    tree.diagnostics = p.diagnostics;
    tree
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: u32,
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    // ---- token helpers -------------------------------------------------

    fn tok(&self, i: usize) -> &Token {
        &self.toks[i.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Token {
        self.tok(self.pos)
    }

    fn nth(&self, n: usize) -> &Token {
        self.tok(self.pos + n)
    }

    fn eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is(text)
    }

    fn at_ident(&self) -> bool {
        self.peek().is_ident()
    }

    fn at_ident_named(&self, name: &str) -> bool {
        self.peek().is_ident() && self.peek().text == name
    }

    fn bump(&mut self) {
        if !self.eof() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, msg: &'static str) -> PResult<T> {
        Err(Fail { pos: self.pos, msg })
    }

    fn expect(&mut self, text: &'static str) -> PResult<()> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(Fail { pos: self.pos, msg: text })
        }
    }

    /// `;`, tolerating its absence at a line break, a closing brace or EOF.
    fn expect_semi(&mut self) -> PResult<()> {
        if self.eat(";") || self.eof() || self.at("}") {
            return Ok(());
        }
        if self.pos > 0 && self.peek().line > self.tok(self.pos - 1).line {
            return Ok(());
        }
        self.fail("expected `;`")
    }

    fn ident(&mut self) -> PResult<Ident> {
        if !self.at_ident() {
            return self.fail("expected identifier");
        }
        let t = self.peek();
        let id = Ident { name: t.text.clone(), span: span_of(t) };
        self.bump();
        Ok(id)
    }

    /// Span from token `start` through the last consumed token.
    fn span_from(&self, start: usize) -> Span {
        let first = self.tok(start);
        let last_end = if self.pos > start { self.tok(self.pos - 1).end } else { first.end };
        Span { start: first.start, end: last_end, line: first.line, col: first.col }
    }

    fn adjacent(&self, i: usize) -> bool {
        self.tok(i).end == self.tok(i + 1).start
    }

    fn enter(&mut self) -> PResult<()> {
        if self.depth >= MAX_DEPTH {
            return self.fail("nesting too deep");
        }
        self.depth += 1;
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Runs `f`, rewinding on failure.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let (pos, depth, ndiag) = (self.pos, self.depth, self.diagnostics.len());
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = pos;
                self.depth = depth;
                self.diagnostics.truncate(ndiag);
                None
            }
        }
    }

    fn recover(&mut self, start: usize, fail: Fail) {
        let failed_at = fail.pos.max(start).min(self.toks.len() - 1);
        let fail_line = self.tok(failed_at).line;
        self.pos = start;
        while self.pos < failed_at && !self.eof() {
            self.pos += 1;
        }
        while !self.eof() && self.peek().line == fail_line {
            if self.at(";") {
                self.pos += 1;
                break;
            }
            if self.at("}") {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            self.bump();
        }
        let first = self.tok(start);
        let last = self.tok(self.pos.saturating_sub(1).max(start));
        self.diagnostics.push(Diagnostic {
            kind: DiagnosticKind::SkippedRegion,
            line: first.line,
            column: first.col,
            message: format!(
                "skipped unparseable code through line {} (expected {})",
                last.line, fail.msg
            ),
        });
    }

    // ---- compilation unit ------------------------------------------------

    fn parse_unit(&mut self, tree: &mut SyntaxTree) {
        while !self.eof() {
            let start = self.pos;
            if self.at("package") {
                match self.parse_package() {
                    Ok(name) => tree.package = Some(name),
                    Err(f) => self.recover(start, f),
                }
                continue;
            }
            if self.at("import") {
                match self.parse_import() {
                    Ok(decl) => tree.imports.push(decl),
                    Err(f) => self.recover(start, f),
                }
                continue;
            }
            if self.at("}") {
                self.recover(start, Fail { pos: start, msg: "a statement, not `}`" });
                continue;
            }
            match self.parse_item() {
                Ok(Some(item)) => tree.items.push(item),
                Ok(None) => {}
                Err(f) => self.recover(start, f),
            }
        }
    }

    fn qualified_path(&mut self) -> PResult<(Vec<String>, bool)> {
        let mut segs = vec![self.ident()?.name];
        let mut wildcard = false;
        while self.eat(".") {
            if self.eat("*") {
                wildcard = true;
                break;
            }
            segs.push(self.ident()?.name);
        }
        Ok((segs, wildcard))
    }

    fn parse_package(&mut self) -> PResult<String> {
        self.expect("package")?;
        let (segs, _) = self.qualified_path()?;
        self.expect_semi()?;
        Ok(segs.join("."))
    }

    fn parse_import(&mut self) -> PResult<ImportDecl> {
        let start = self.pos;
        self.expect("import")?;
        let is_static = self.eat("static");
        let (segs, wildcard) = self.qualified_path()?;
        self.expect_semi()?;
        Ok(ImportDecl {
            import: Import { path: QualifiedName::new(segs.join(".")), wildcard, is_static },
            span: self.span_from(start),
        })
    }

    fn parse_item(&mut self) -> PResult<Option<Item>> {
        let start = self.pos;
        let had_modifiers = self.skip_modifiers()?;
        if self.at_type_decl() {
            return Ok(Some(Item::Type(self.parse_type_decl(start)?)));
        }
        if had_modifiers && self.at("{") {
            return Ok(Some(Item::Member(Member::Initializer(self.parse_block()?))));
        }
        if let Some(m) = self.attempt(|p| p.parse_method_decl(start, had_modifiers)) {
            return Ok(Some(Item::Member(Member::Method(m))));
        }
        if had_modifiers {
            let field = self.parse_var_decl_rest(start)?;
            return Ok(Some(Item::Member(Member::Field(field))));
        }
        self.pos = start;
        Ok(Some(Item::Stmt(self.parse_block_stmt()?)))
    }

    // ---- modifiers, annotations, type declarations ------------------------

    /// Skips modifiers and annotations; true if any were present.
    fn skip_modifiers(&mut self) -> PResult<bool> {
        let start = self.pos;
        loop {
            if self.at("@") && !self.nth(1).is("interface") {
                self.skip_annotation()?;
            } else if MODIFIERS.iter().any(|m| self.at(m))
                || self.at("default") && !self.nth(1).is(":") && !self.nth(1).is("->")
                || self.at_ident_named("sealed") && (self.nth(1).is_ident() || self.nth(1).kind == TokenKind::Keyword)
            {
                self.bump();
            } else if self.at_ident_named("non") && self.nth(1).is("-") && self.nth(2).text == "sealed" {
                self.pos += 3;
            } else {
                break;
            }
        }
        Ok(self.pos > start)
    }

    fn skip_annotation(&mut self) -> PResult<()> {
        self.expect("@")?;
        self.ident()?;
        while self.at(".") && self.nth(1).is_ident() {
            self.pos += 2;
        }
        if self.at("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(())
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect_text(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.eof() {
                return self.fail("unbalanced brackets");
            }
            if self.at(open) {
                depth += 1;
            } else if self.at(close) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    fn expect_text(&mut self, text: &str) -> PResult<()> {
        if self.eat(text) {
            Ok(())
        } else {
            self.fail("expected bracket")
        }
    }

    fn at_type_decl(&self) -> bool {
        self.at("class")
            || self.at("interface")
            || self.at("enum")
            || (self.at("@") && self.nth(1).is("interface"))
            || (self.at_ident_named("record") && self.nth(1).is_ident() && (self.nth(2).is("(") || self.nth(2).is("<")))
    }

    fn parse_type_decl(&mut self, start: usize) -> PResult<TypeDecl> {
        self.enter()?;
        let r = self.parse_type_decl_inner(start);
        self.leave();
        r
    }

    fn parse_type_decl_inner(&mut self, start: usize) -> PResult<TypeDecl> {
        let kind = if self.eat("class") {
            TypeKind::Class
        } else if self.eat("interface") {
            TypeKind::Interface
        } else if self.eat("enum") {
            TypeKind::Enum
        } else if self.at("@") {
            self.pos += 2;
            TypeKind::Annotation
        } else {
            self.bump();
            TypeKind::Record
        };
        let name = self.ident()?;
        if self.at("<") {
            self.skip_balanced("<", ">")?;
        }
        let record_params = if kind == TypeKind::Record { self.parse_params()? } else { Vec::new() };
        let mut supertypes = Vec::new();
        loop {
            if self.eat("extends") || self.eat("implements") {
                supertypes.push(self.parse_type()?);
                while self.eat(",") {
                    supertypes.push(self.parse_type()?);
                }
            } else if self.at_ident_named("permits") {
                self.bump();
                self.parse_type()?;
                while self.eat(",") {
                    self.parse_type()?;
                }
            } else {
                break;
            }
        }
        self.expect("{")?;
        let enum_constants = if kind == TypeKind::Enum { self.parse_enum_constants()? } else { Vec::new() };
        let members = self.parse_class_body_members(&name.name);
        self.close_brace();
        Ok(TypeDecl { kind, name, supertypes, record_params, enum_constants, members, span: self.span_from(start) })
    }

    /// Consumes a `}`; at EOF records an unterminated-block note instead.
    fn close_brace(&mut self) {
        if !self.eat("}") {
            let t = self.peek();
            let (line, column) = (t.line, t.col);
            self.diagnostics.push(Diagnostic {
                kind: DiagnosticKind::UnterminatedBlock,
                line,
                column,
                message: "block not closed before end of input".into(),
            });
        }
    }

    fn parse_enum_constants(&mut self) -> PResult<Vec<EnumConstant>> {
        let mut out = Vec::new();
        loop {
            if self.eat(";") || self.at("}") || self.eof() {
                break;
            }
            while self.at("@") {
                self.skip_annotation()?;
            }
            let name = self.ident()?;
            let args = if self.at("(") { self.parse_args()? } else { Vec::new() };
            let body = if self.at("{") {
                self.bump();
                let members = self.parse_class_body_members(&name.name);
                self.close_brace();
                Some(members)
            } else {
                None
            };
            out.push(EnumConstant { name, args, body });
            if !self.eat(",") {
                self.eat(";");
                break;
            }
        }
        Ok(out)
    }

    /// Members up to (not including) the closing `}`.
    fn parse_class_body_members(&mut self, class_name: &str) -> Vec<Member> {
        let mut members = Vec::new();
        while !self.eof() && !self.at("}") {
            let start = self.pos;
            match self.parse_member(class_name) {
                Ok(Some(m)) => members.push(m),
                Ok(None) => {}
                Err(f) => self.recover(start, f),
            }
        }
        members
    }

    fn parse_member(&mut self, class_name: &str) -> PResult<Option<Member>> {
        self.enter()?;
        let r = self.parse_member_inner(class_name);
        self.leave();
        r
    }

    fn parse_member_inner(&mut self, class_name: &str) -> PResult<Option<Member>> {
        let start = self.pos;
        if self.eat(";") {
            return Ok(None);
        }
        self.skip_modifiers()?;
        if self.at("{") {
            return Ok(Some(Member::Initializer(self.parse_block()?)));
        }
        if self.at_type_decl() {
            return Ok(Some(Member::Type(self.parse_type_decl(start)?)));
        }
        // Compact canonical constructor of a record.
        if self.at_ident() && self.peek().text == class_name && self.nth(1).is("{") {
            let name = self.ident()?;
            let body = self.parse_block()?;
            return Ok(Some(Member::Method(MethodDecl {
                name,
                ret: None,
                params: Vec::new(),
                body: Some(body),
                span: self.span_from(start),
            })));
        }
        if let Some(m) = self.attempt(|p| p.parse_method_decl(start, true)) {
            return Ok(Some(Member::Method(m)));
        }
        Ok(Some(Member::Field(self.parse_var_decl_rest(start)?)))
    }

    /// `[<T>] (Type | void) name(params) [throws ..] (body | ;)`, or a
    /// constructor when `allow_ctor` is set.
    fn parse_method_decl(&mut self, start: usize, allow_ctor: bool) -> PResult<MethodDecl> {
        if self.at("<") {
            self.skip_balanced("<", ">")?;
        }
        let ret = if allow_ctor && self.at_ident() && self.nth(1).is("(") {
            None
        } else if self.eat("void") {
            Some(TypeRef { segments: Vec::new(), args: Vec::new(), dims: 0, primitive: true, span: self.span_from(self.pos - 1) })
        } else {
            Some(self.parse_type()?)
        };
        let name = self.ident()?;
        if !self.at("(") {
            return self.fail("expected `(`");
        }
        let params = self.parse_params()?;
        while self.at("[") && self.nth(1).is("]") {
            self.pos += 2;
        }
        if self.eat("throws") {
            self.parse_type()?;
            while self.eat(",") {
                self.parse_type()?;
            }
        }
        let body = if self.at("{") {
            Some(self.parse_block()?)
        } else if self.eat("default") {
            self.parse_expr_or_array_init()?;
            self.expect(";")?;
            None
        } else {
            self.expect(";")?;
            None
        };
        Ok(MethodDecl { name, ret, params, body, span: self.span_from(start) })
    }

    fn parse_params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        loop {
            self.skip_modifiers()?;
            let mut ty = self.parse_type()?;
            if self.eat("...") {
                ty.dims += 1;
            }
            let name = if self.at("this") {
                let t = self.peek();
                let id = Ident { name: "this".into(), span: span_of(t) };
                self.bump();
                id
            } else {
                self.ident()?
            };
            while self.at("[") && self.nth(1).is("]") {
                self.pos += 2;
                ty.dims += 1;
            }
            params.push(Param { ty: Some(ty), name });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    /// Declarators after the type: `a = 1, b[] = {..};`. `start` is where
    /// the declaration (including modifiers) began.
    fn parse_var_decl_rest(&mut self, start: usize) -> PResult<LocalVar> {
        let ty = self.parse_type()?;
        let declarators = self.parse_declarators()?;
        self.expect_semi()?;
        Ok(LocalVar { ty, declarators, span: self.span_from(start) })
    }

    fn parse_declarators(&mut self) -> PResult<Vec<Declarator>> {
        let mut out = Vec::new();
        loop {
            let name = self.ident()?;
            let mut dims = 0;
            while self.at("[") && self.nth(1).is("]") {
                self.pos += 2;
                dims += 1;
            }
            let init = if self.eat("=") { Some(self.parse_expr_or_array_init()?) } else { None };
            out.push(Declarator { name, dims, init });
            if !self.eat(",") {
                break;
            }
        }
        Ok(out)
    }

    // ---- types -----------------------------------------------------------

    fn parse_type(&mut self) -> PResult<TypeRef> {
        self.enter()?;
        let r = self.parse_type_inner(true);
        self.leave();
        r
    }

    fn parse_type_inner(&mut self, with_dims: bool) -> PResult<TypeRef> {
        let start = self.pos;
        while self.at("@") {
            self.skip_annotation()?;
        }
        let mut ty = TypeRef { segments: Vec::new(), args: Vec::new(), dims: 0, primitive: false, span: Span::default() };
        if PRIMITIVES.iter().any(|p| self.at(p)) {
            let t = self.peek();
            ty.segments.push(Ident { name: t.text.clone(), span: span_of(t) });
            ty.primitive = true;
            self.bump();
        } else {
            loop {
                ty.segments.push(self.ident()?);
                if self.at("<") {
                    let args = self.parse_type_args()?;
                    ty.args.extend(args);
                }
                if self.at(".") && (self.nth(1).is_ident() || self.nth(1).is("@")) {
                    self.bump();
                    while self.at("@") {
                        self.skip_annotation()?;
                    }
                } else {
                    break;
                }
            }
        }
        if with_dims {
            while self.at("[") && self.nth(1).is("]") {
                self.pos += 2;
                ty.dims += 1;
            }
        }
        ty.span = self.span_from(start);
        Ok(ty)
    }

    fn parse_type_args(&mut self) -> PResult<Vec<TypeRef>> {
        self.expect("<")?;
        let mut args = Vec::new();
        if self.eat(">") {
            return Ok(args);
        }
        loop {
            while self.at("@") {
                self.skip_annotation()?;
            }
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    args.push(self.parse_type()?);
                }
            } else {
                args.push(self.parse_type()?);
            }
            while self.eat("&") {
                self.parse_type()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(args)
    }

    // ---- statements ------------------------------------------------------

    fn parse_block(&mut self) -> PResult<Block> {
        let start = self.pos;
        self.expect("{")?;
        let stmts = self.parse_stmts_until(|p| p.at("}"));
        self.close_brace();
        Ok(Block { stmts, span: self.span_from(start) })
    }

    fn parse_stmts_until(&mut self, stop: fn(&Parser) -> bool) -> Vec<Stmt> {
        let mut stmts = Vec::new();
        while !self.eof() && !stop(self) {
            let start = self.pos;
            match self.parse_block_stmt() {
                Ok(s) => stmts.push(s),
                Err(f) => self.recover(start, f),
            }
        }
        stmts
    }

    fn parse_block_stmt(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let r = self.parse_block_stmt_inner();
        self.leave();
        r
    }

    // The dispatcher stays small and each arm lives in its own function so
    // that deeply nested blocks do not pile up large stack frames.
    fn parse_block_stmt_inner(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        let kind = if self.at("{") {
            StmtKind::Block(self.parse_block()?)
        } else if self.eat(";") {
            StmtKind::Empty
        } else if self.at("if") || self.at("while") || self.at("do") {
            self.stmt_conditional()?
        } else if self.at("for") {
            self.parse_for()?
        } else if self.at("try") {
            self.parse_try()?
        } else if self.at("switch") {
            self.bump();
            StmtKind::Switch(self.parse_switch_rest(start)?)
        } else if self.at("return")
            || self.at("throw")
            || self.at("break")
            || self.at("continue")
            || self.at("assert")
            || (self.at("synchronized") && self.nth(1).is("("))
            || (self.at_ident_named("yield") && starts_expression(self.nth(1)) && !self.nth(1).is("("))
        {
            self.stmt_simple()?
        } else if self.at_ident() && self.nth(1).is(":") {
            let label = self.ident()?;
            self.bump();
            StmtKind::Labeled { label, body: Box::new(self.parse_block_stmt()?) }
        } else {
            self.stmt_declaration_or_expr(start)?
        };
        Ok(Stmt { kind, span: self.span_from(start) })
    }

    #[inline(never)]
    fn stmt_conditional(&mut self) -> PResult<StmtKind> {
        if self.eat("if") {
            let cond = self.parse_paren_expr()?;
            let then = Box::new(self.parse_block_stmt()?);
            let els = if self.eat("else") { Some(Box::new(self.parse_block_stmt()?)) } else { None };
            Ok(StmtKind::If { cond, then, els })
        } else if self.eat("while") {
            let cond = self.parse_paren_expr()?;
            Ok(StmtKind::While { cond, body: Box::new(self.parse_block_stmt()?) })
        } else {
            self.expect("do")?;
            let body = Box::new(self.parse_block_stmt()?);
            self.expect("while")?;
            let cond = self.parse_paren_expr()?;
            self.expect_semi()?;
            Ok(StmtKind::DoWhile { body, cond })
        }
    }

    #[inline(never)]
    fn stmt_simple(&mut self) -> PResult<StmtKind> {
        let kind = if self.eat("return") {
            let value = if self.at(";") || self.at("}") || self.eof() { None } else { Some(self.parse_expr()?) };
            StmtKind::Return(value)
        } else if self.eat("throw") {
            StmtKind::Throw(self.parse_expr()?)
        } else if self.eat("break") || self.eat("continue") {
            if self.at_ident() {
                self.bump();
            }
            StmtKind::Jump
        } else if self.eat("synchronized") {
            let lock = self.parse_paren_expr()?;
            return Ok(StmtKind::Sync { lock, body: self.parse_block()? });
        } else if self.eat("assert") {
            let cond = self.parse_expr()?;
            let msg = if self.eat(":") { Some(self.parse_expr()?) } else { None };
            StmtKind::Assert(cond, msg)
        } else {
            self.bump();
            StmtKind::Yield(self.parse_expr()?)
        };
        self.expect_semi()?;
        Ok(kind)
    }

    #[inline(never)]
    fn stmt_declaration_or_expr(&mut self, start: usize) -> PResult<StmtKind> {
        if self.at("final") || self.at("@") || self.at("abstract") || self.at("static") || self.at_type_decl() {
            self.skip_modifiers()?;
            return Ok(if self.at_type_decl() {
                StmtKind::LocalClass(self.parse_type_decl(start)?)
            } else {
                StmtKind::LocalVar(self.parse_var_decl_rest(start)?)
            });
        }
        if let Some(decl) = self.attempt(|p| p.parse_local_var(start)) {
            return Ok(StmtKind::LocalVar(decl));
        }
        let e = self.parse_expr()?;
        self.expect_semi()?;
        Ok(StmtKind::Expr(e))
    }

    /// A local variable declaration without modifiers. Fails (for
    /// backtracking) unless the input is clearly `Type name ...`.
    fn parse_local_var(&mut self, start: usize) -> PResult<LocalVar> {
        let ty = self.parse_type()?;
        if !self.at_ident() {
            return self.fail("expected identifier");
        }
        let next = self.nth(1);
        let follows = next.is("=")
            || next.is(";")
            || next.is(",")
            || next.is("[")
            || next.is(":")
            || next.is("}")
            || next.kind == TokenKind::Eof
            || next.line > self.peek().line;
        if !follows {
            return self.fail("not a declaration");
        }
        let declarators = self.parse_declarators()?;
        self.expect_semi()?;
        Ok(LocalVar { ty, declarators, span: self.span_from(start) })
    }

    fn parse_paren_expr(&mut self) -> PResult<Expr> {
        self.expect("(")?;
        let e = self.parse_expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn parse_for(&mut self) -> PResult<StmtKind> {
        self.expect("for")?;
        self.expect("(")?;
        let decl_start = self.pos;
        // Enhanced for: `for (Type x : iter)`.
        let foreach = self.attempt(|p| {
            p.skip_modifiers()?;
            let ty = p.parse_type()?;
            let name = p.ident()?;
            p.expect(":")?;
            Ok(LocalVar { ty, declarators: vec![Declarator { name, dims: 0, init: None }], span: p.span_from(decl_start) })
        });
        if let Some(var) = foreach {
            let iter = self.parse_expr()?;
            self.expect(")")?;
            let body = Box::new(self.parse_block_stmt()?);
            return Ok(StmtKind::ForEach { var, iter, body });
        }

        let mut init = Vec::new();
        if !self.at(";") {
            let s = self.pos;
            let had_mods = self.skip_modifiers()?;
            let decl = if had_mods {
                Some(self.parse_for_decl(s)?)
            } else {
                self.attempt(|p| p.parse_for_decl(s))
            };
            match decl {
                Some(d) => init.push(Stmt { span: d.span, kind: StmtKind::LocalVar(d) }),
                None => loop {
                    let e = self.parse_expr()?;
                    init.push(Stmt { span: e.span, kind: StmtKind::Expr(e) });
                    if !self.eat(",") {
                        break;
                    }
                },
            }
        }
        self.expect(";")?;
        let cond = if self.at(";") { None } else { Some(self.parse_expr()?) };
        self.expect(";")?;
        let mut update = Vec::new();
        if !self.at(")") {
            loop {
                update.push(self.parse_expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let body = Box::new(self.parse_block_stmt()?);
        Ok(StmtKind::For { init, cond, update, body })
    }

    fn parse_for_decl(&mut self, start: usize) -> PResult<LocalVar> {
        let ty = self.parse_type()?;
        let declarators = self.parse_declarators()?;
        if !self.at(";") {
            return self.fail("expected `;`");
        }
        Ok(LocalVar { ty, declarators, span: self.span_from(start) })
    }

    fn parse_try(&mut self) -> PResult<StmtKind> {
        self.expect("try")?;
        let mut resources = Vec::new();
        if self.eat("(") {
            while !self.at(")") {
                let s = self.pos;
                self.skip_modifiers()?;
                let res = self.attempt(|p| {
                    let ty = p.parse_type()?;
                    let name = p.ident()?;
                    p.expect("=")?;
                    let init = p.parse_expr()?;
                    Ok(LocalVar {
                        ty,
                        declarators: vec![Declarator { name, dims: 0, init: Some(init) }],
                        span: p.span_from(s),
                    })
                });
                match res {
                    Some(d) => resources.push(Stmt { span: d.span, kind: StmtKind::LocalVar(d) }),
                    None => {
                        let e = self.parse_expr()?;
                        resources.push(Stmt { span: e.span, kind: StmtKind::Expr(e) });
                    }
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        let body = self.parse_block()?;
        let mut catches = Vec::new();
        while self.eat("catch") {
            self.expect("(")?;
            self.skip_modifiers()?;
            let mut types = vec![self.parse_type()?];
            while self.eat("|") {
                types.push(self.parse_type()?);
            }
            let name = self.ident()?;
            self.expect(")")?;
            catches.push(Catch { types, name, body: self.parse_block()? });
        }
        let finally = if self.eat("finally") { Some(self.parse_block()?) } else { None };
        Ok(StmtKind::Try { resources, body, catches, finally })
    }

    /// After `switch`: `(selector) { cases }`.
    fn parse_switch_rest(&mut self, start: usize) -> PResult<SwitchBlock> {
        let selector = self.parse_paren_expr()?;
        self.expect("{")?;
        let mut cases = Vec::new();
        while !self.eof() && !self.at("}") {
            let case_start = self.pos;
            let mut case = SwitchCase { labels: Vec::new(), patterns: Vec::new(), guard: None, body: Vec::new(), span: Span::default() };
            if self.eat("default") {
            } else if self.eat("case") {
                loop {
                    let pattern = self.attempt(|p| {
                        p.skip_modifiers()?;
                        let ty = p.parse_type()?;
                        let name = p.ident()?;
                        if p.at("->") || p.at(":") || p.at(",") || p.at_ident_named("when") {
                            Ok(Param { ty: Some(ty), name })
                        } else {
                            p.fail("not a pattern")
                        }
                    });
                    match pattern {
                        Some(p) => case.patterns.push(p),
                        None if self.eat("default") => {}
                        None => case.labels.push(self.parse_ternary()?),
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                if self.at_ident_named("when") {
                    self.bump();
                    case.guard = Some(self.parse_ternary()?);
                }
            } else {
                return self.fail("expected `case` or `default`");
            }

            if self.eat("->") {
                let s = self.pos;
                let stmt = if self.at("{") || self.at("throw") {
                    self.parse_block_stmt()?
                } else {
                    let e = self.parse_expr()?;
                    self.expect_semi()?;
                    Stmt { kind: StmtKind::Expr(e), span: self.span_from(s) }
                };
                case.body.push(stmt);
            } else {
                self.expect(":")?;
                case.body = self.parse_stmts_until(|p| p.at("case") || p.at("default") || p.at("}"));
            }
            case.span = self.span_from(case_start);
            cases.push(case);
        }
        self.close_brace();
        Ok(SwitchBlock { selector, cases, span: self.span_from(start) })
    }

    // ---- expressions -----------------------------------------------------

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.parse_assignment();
        self.leave();
        r
    }

    fn parse_expr_or_array_init(&mut self) -> PResult<Expr> {
        if self.at("{") {
            self.parse_array_init()
        } else {
            self.parse_expr()
        }
    }

    fn parse_array_init(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            items.push(self.parse_expr_or_array_init()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(Expr { kind: ExprKind::ArrayInit(items), span: self.span_from(start) })
    }

    fn parse_assignment(&mut self) -> PResult<Expr> {
        if self.lambda_ahead() {
            return self.parse_lambda();
        }
        let start = self.pos;
        let lhs = self.parse_ternary()?;
        if let Some((op, ntoks)) = self.assign_op() {
            self.pos += ntoks;
            let rhs = self.parse_expr_or_array_init()?;
            return Ok(Expr {
                kind: ExprKind::Assign { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span: self.span_from(start),
            });
        }
        Ok(lhs)
    }

    fn assign_op(&self) -> Option<(String, usize)> {
        const SIMPLE: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<="];
        let t = self.peek();
        if t.kind == TokenKind::Op && SIMPLE.contains(&t.text.as_str()) {
            return Some((t.text.clone(), 1));
        }
        if t.is(">") {
            let p = self.pos;
            if self.tok(p + 1).is(">") && self.adjacent(p) {
                if self.tok(p + 2).is("=") && self.adjacent(p + 1) {
                    return Some((">>=".into(), 3));
                }
                if self.tok(p + 2).is(">") && self.adjacent(p + 1) && self.tok(p + 3).is("=") && self.adjacent(p + 2) {
                    return Some((">>>=".into(), 4));
                }
            }
        }
        None
    }

    fn lambda_ahead(&self) -> bool {
        if self.at_ident() && self.nth(1).is("->") {
            return true;
        }
        if !self.at("(") {
            return false;
        }
        let mut depth = 0usize;
        let mut i = self.pos;
        loop {
            let t = self.tok(i);
            match t.kind {
                TokenKind::Eof => return false,
                _ if t.is("(") => depth += 1,
                _ if t.is(")") => {
                    depth -= 1;
                    if depth == 0 {
                        return self.tok(i + 1).is("->");
                    }
                }
                _ if t.is(";") || t.is("{") || t.is("}") => return false,
                _ => {}
            }
            i += 1;
        }
    }

    fn parse_lambda(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut params = Vec::new();
        if self.at_ident() {
            params.push(Param { ty: None, name: self.ident()? });
        } else {
            self.expect("(")?;
            if !self.at(")") {
                loop {
                    if self.at_ident() && (self.nth(1).is(",") || self.nth(1).is(")")) {
                        params.push(Param { ty: None, name: self.ident()? });
                    } else {
                        self.skip_modifiers()?;
                        let mut ty = self.parse_type()?;
                        if self.eat("...") {
                            ty.dims += 1;
                        }
                        let name = self.ident()?;
                        let ty = if ty.is_var() { None } else { Some(ty) };
                        params.push(Param { ty, name });
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            self.expect(")")?;
        }
        self.expect("->")?;
        let body = if self.at("{") {
            LambdaBody::Block(self.parse_block()?)
        } else {
            LambdaBody::Expr(Box::new(self.parse_expr()?))
        };
        Ok(Expr { kind: ExprKind::Lambda { params, body }, span: self.span_from(start) })
    }

    fn parse_ternary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let cond = self.parse_binary(1)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        let then = self.parse_expr()?;
        self.expect(":")?;
        let els = if self.lambda_ahead() { self.parse_lambda()? } else { self.parse_ternary()? };
        Ok(Expr {
            kind: ExprKind::Conditional { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) },
            span: self.span_from(start),
        })
    }

    /// Binary operator at the cursor: (operator, precedence, token count).
    fn binop(&self) -> Option<(&'static str, u8, usize)> {
        let t = self.peek();
        if t.kind != TokenKind::Op && !t.is("instanceof") {
            return None;
        }
        let p = self.pos;
        Some(match t.text.as_str() {
            "||" => ("||", 1, 1),
            "&&" => ("&&", 2, 1),
            "|" => ("|", 3, 1),
            "^" => ("^", 4, 1),
            "&" => ("&", 5, 1),
            "==" => ("==", 6, 1),
            "!=" => ("!=", 6, 1),
            "<" => ("<", 7, 1),
            "<=" => ("<=", 7, 1),
            "instanceof" => ("instanceof", 7, 1),
            ">" => {
                let next = self.tok(p + 1);
                if next.is(">") && self.adjacent(p) {
                    let third = self.tok(p + 2);
                    if third.is(">") && self.adjacent(p + 1) {
                        if self.tok(p + 3).is("=") && self.adjacent(p + 2) {
                            return None;
                        }
                        (">>>", 8, 3)
                    } else if third.is("=") && self.adjacent(p + 1) {
                        return None;
                    } else {
                        (">>", 8, 2)
                    }
                } else if next.is("=") && self.adjacent(p) {
                    (">=", 7, 2)
                } else {
                    (">", 7, 1)
                }
            }
            "<<" => ("<<", 8, 1),
            "+" => ("+", 9, 1),
            "-" => ("-", 9, 1),
            "*" => ("*", 10, 1),
            "/" => ("/", 10, 1),
            "%" => ("%", 10, 1),
            _ => return None,
        })
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.pos;
        let mut lhs = self.parse_unary()?;
        while let Some((op, prec, ntoks)) = self.binop() {
            if prec < min_prec {
                break;
            }
            self.pos += ntoks;
            if op == "instanceof" {
                self.eat("final");
                let ty = self.parse_type()?;
                let binding = if self.at_ident() { Some(self.ident()?) } else { None };
                lhs = Expr {
                    kind: ExprKind::InstanceOf { expr: Box::new(lhs), ty, binding },
                    span: self.span_from(start),
                };
                continue;
            }
            let rhs = self.parse_binary(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary { op: op.to_string(), lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span: self.span_from(start),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.parse_unary_inner();
        self.leave();
        r
    }

    fn parse_unary_inner(&mut self) -> PResult<Expr> {
        let start = self.pos;
        for op in ["++", "--", "+", "-", "!", "~"] {
            if self.eat(op) {
                let expr = self.parse_unary()?;
                return Ok(Expr {
                    kind: ExprKind::Unary { op: op.to_string(), expr: Box::new(expr) },
                    span: self.span_from(start),
                });
            }
        }
        if self.at("(") {
            if let Some(cast) = self.attempt(|p| p.parse_cast(start)) {
                return Ok(cast);
            }
        }
        self.parse_postfix()
    }

    fn parse_cast(&mut self, start: usize) -> PResult<Expr> {
        self.expect("(")?;
        let ty = self.parse_type()?;
        while self.eat("&") {
            self.parse_type()?;
        }
        self.expect(")")?;
        let operand_ok = if ty.primitive && ty.dims == 0 {
            starts_expression(self.peek())
        } else {
            let t = self.peek();
            (starts_expression(t) && !matches!(t.text.as_str(), "+" | "-" | "++" | "--")) || self.lambda_ahead()
        };
        if !operand_ok {
            return self.fail("not a cast");
        }
        let expr = if self.lambda_ahead() { self.parse_lambda()? } else { self.parse_unary()? };
        Ok(Expr { kind: ExprKind::Cast { ty, expr: Box::new(expr) }, span: self.span_from(start) })
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut e = self.parse_primary()?;
        loop {
            if self.at(".") {
                self.bump();
                if self.at("new") {
                    e = self.parse_creator(start, Some(e))?;
                } else if self.at("<") {
                    self.parse_type_args()?;
                    let name = self.ident()?;
                    let args = self.parse_args()?;
                    e = Expr { kind: ExprKind::Call { receiver: Some(Box::new(e)), name, args }, span: self.span_from(start) };
                } else if self.eat("this") || self.eat("super") {
                    e = Expr { kind: ExprKind::This, span: self.span_from(start) };
                } else if self.eat("class") {
                    let ty = expr_to_type(&e, 0).ok_or(Fail { pos: self.pos, msg: "type before `.class`" })?;
                    e = Expr { kind: ExprKind::ClassLit(ty), span: self.span_from(start) };
                } else {
                    let name = self.ident()?;
                    if self.at("(") {
                        let args = self.parse_args()?;
                        e = Expr { kind: ExprKind::Call { receiver: Some(Box::new(e)), name, args }, span: self.span_from(start) };
                    } else {
                        e = Expr { kind: ExprKind::FieldAccess { target: Box::new(e), name }, span: self.span_from(start) };
                    }
                }
            } else if self.at("[") {
                if self.nth(1).is("]") {
                    let mut dims = 0;
                    while self.at("[") && self.nth(1).is("]") {
                        self.pos += 2;
                        dims += 1;
                    }
                    let ty = expr_to_type(&e, dims).ok_or(Fail { pos: self.pos, msg: "array type" })?;
                    if self.eat(".") {
                        self.expect("class")?;
                        e = Expr { kind: ExprKind::ClassLit(ty), span: self.span_from(start) };
                    } else if self.at("::") {
                        e = Expr { kind: ExprKind::TypeExpr(ty), span: self.span_from(start) };
                    } else {
                        return self.fail("expected `.class` or `::`");
                    }
                } else {
                    self.bump();
                    let index = self.parse_expr()?;
                    self.expect("]")?;
                    e = Expr { kind: ExprKind::Index { target: Box::new(e), index: Box::new(index) }, span: self.span_from(start) };
                }
            } else if self.at("::") {
                self.bump();
                if self.at("<") {
                    self.parse_type_args()?;
                }
                let name = if self.at("new") {
                    let t = self.peek();
                    let id = Ident { name: "new".into(), span: span_of(t) };
                    self.bump();
                    id
                } else {
                    self.ident()?
                };
                e = Expr { kind: ExprKind::MethodRef { target: Box::new(e), name }, span: self.span_from(start) };
            } else if self.at("++") || self.at("--") {
                let op = self.peek().text.clone();
                self.bump();
                e = Expr { kind: ExprKind::Unary { op, expr: Box::new(e) }, span: self.span_from(start) };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Number | TokenKind::Char | TokenKind::Str => {
                self.bump();
                ExprKind::Literal
            }
            TokenKind::Keyword if matches!(t.text.as_str(), "true" | "false" | "null") => {
                self.bump();
                ExprKind::Literal
            }
            TokenKind::Keyword if t.text == "this" || t.text == "super" => {
                self.bump();
                if self.at("(") {
                    let args = self.parse_args()?;
                    ExprKind::Call { receiver: None, name: Ident { name: t.text.clone(), span: span_of(&t) }, args }
                } else if t.text == "this" {
                    ExprKind::This
                } else {
                    ExprKind::Super
                }
            }
            TokenKind::Keyword if t.text == "new" => return self.parse_creator(start, None),
            TokenKind::Keyword if t.text == "switch" => {
                self.bump();
                ExprKind::Switch(Box::new(self.parse_switch_rest(start)?))
            }
            TokenKind::Keyword if PRIMITIVES.contains(&t.text.as_str()) || t.text == "void" => {
                let ty = if t.text == "void" {
                    self.bump();
                    TypeRef { segments: vec![Ident { name: "void".into(), span: span_of(&t) }], args: Vec::new(), dims: 0, primitive: true, span: span_of(&t) }
                } else {
                    self.parse_type()?
                };
                if self.eat(".") {
                    self.expect("class")?;
                    ExprKind::ClassLit(ty)
                } else if self.at("::") {
                    ExprKind::TypeExpr(ty)
                } else {
                    return self.fail("expected `.class`");
                }
            }
            TokenKind::Op if t.text == "(" => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(")")?;
                ExprKind::Paren(Box::new(inner))
            }
            TokenKind::Ident => {
                let name = self.ident()?;
                if self.at("(") {
                    let args = self.parse_args()?;
                    ExprKind::Call { receiver: None, name, args }
                } else if self.at("<") && self.generic_type_ref_ahead() {
                    // `List<String>::size` or `Foo<Bar>.class`-like forms.
                    self.pos = start;
                    ExprKind::TypeExpr(self.parse_type()?)
                } else {
                    ExprKind::Name(name)
                }
            }
            _ => return self.fail("expected expression"),
        };
        Ok(Expr { kind, span: self.span_from(start) })
    }

    /// After an identifier: does `<...>` close and get followed by `::`?
    fn generic_type_ref_ahead(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.pos;
        loop {
            let t = self.tok(i);
            if t.is("<") {
                depth += 1;
            } else if t.is(">") {
                depth -= 1;
                if depth == 0 {
                    return self.tok(i + 1).is("::");
                }
            } else if !(t.is_ident() || t.is(",") || t.is(".") || t.is("?") || t.is("extends") || t.is("super") || t.is("[") || t.is("]")) {
                return false;
            }
            i += 1;
        }
    }

    fn parse_creator(&mut self, start: usize, outer: Option<Expr>) -> PResult<Expr> {
        self.expect("new")?;
        if self.at("<") {
            self.parse_type_args()?;
        }
        let ty = self.parse_type_inner(false)?;
        if self.at("[") {
            let mut dims = Vec::new();
            let mut extra = 0;
            while self.at("[") {
                self.bump();
                if self.eat("]") {
                    extra += 1;
                } else {
                    dims.push(self.parse_expr()?);
                    self.expect("]")?;
                }
            }
            let init = if self.at("{") {
                match self.parse_array_init()?.kind {
                    ExprKind::ArrayInit(items) => Some(items),
                    _ => None,
                }
            } else {
                None
            };
            let mut ty = ty;
            ty.dims = (dims.len() + extra) as u32;
            return Ok(Expr { kind: ExprKind::NewArray { ty, dims, init }, span: self.span_from(start) });
        }
        let args = self.parse_args()?;
        let body = if self.at("{") {
            self.bump();
            let members = self.parse_class_body_members("");
            self.close_brace();
            Some(members)
        } else {
            None
        };
        Ok(Expr {
            kind: ExprKind::New { ty, args, body, outer: outer.map(Box::new) },
            span: self.span_from(start),
        })
    }
}

fn span_of(t: &Token) -> Span {
    Span { start: t.start, end: t.end, line: t.line, col: t.col }
}

fn starts_expression(t: &Token) -> bool {
    match t.kind {
        TokenKind::Ident | TokenKind::Number | TokenKind::Char | TokenKind::Str => true,
        TokenKind::Keyword => matches!(
            t.text.as_str(),
            "this" | "super" | "new" | "true" | "false" | "null" | "switch" | "boolean" | "byte" | "char"
                | "short" | "int" | "long" | "float" | "double" | "void"
        ),
        TokenKind::Op => matches!(t.text.as_str(), "(" | "!" | "~" | "+" | "-" | "++" | "--"),
        _ => false,
    }
}

/// Reinterprets a dotted name expression as a type (for `X.class`, `X[]::new`).
fn expr_to_type(e: &Expr, dims: u32) -> Option<TypeRef> {
    fn collect(e: &Expr, out: &mut Vec<Ident>) -> bool {
        match &e.kind {
            ExprKind::Name(id) => {
                out.push(id.clone());
                true
            }
            ExprKind::FieldAccess { target, name } => {
                let ok = collect(target, out);
                out.push(name.clone());
                ok
            }
            ExprKind::TypeExpr(t) => {
                out.extend(t.segments.iter().cloned());
                true
            }
            _ => false,
        }
    }
    let mut segments = Vec::new();
    if !collect(e, &mut segments) {
        return None;
    }
    Some(TypeRef { segments, args: Vec::new(), dims, primitive: false, span: e.span })
}
