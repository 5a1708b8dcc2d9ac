//! Java tokenizer. Never fails: characters that cannot start a token become
//! `Error` tokens and the parser decides what to do with them.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    Char,
    Str,
    Op,
    Error,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
    /// 1-based line and column (columns count characters).
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        matches!(self.kind, TokenKind::Op | TokenKind::Keyword) && self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null",
];

// `>` is always emitted alone so that generic closers never fuse into shift
// operators; the parser re-joins adjacent `>` tokens in expressions.
const OPERATORS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "<<", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", "<", ">",
    "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

pub fn tokenize(src: &str) -> Vec<Token> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur);
        let (start, line, col) = (cur.pos, cur.line, cur.col);
        let Some(c) = cur.peek() else {
            out.push(Token { kind: TokenKind::Eof, text: String::new(), start, end: start, line, col });
            return out;
        };
        let kind = if c.is_alphabetic() || c == '_' || c == '$' {
            cur.bump_while(|c| c.is_alphanumeric() || c == '_' || c == '$');
            if KEYWORDS.contains(&&src[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur);
            TokenKind::Number
        } else if c == '"' {
            lex_string(&mut cur)
        } else if c == '\'' {
            lex_char(&mut cur)
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            TokenKind::Op
        } else {
            cur.bump();
            TokenKind::Error
        };
        out.push(Token { kind, text: src[start..cur.pos].to_string(), start, end: cur.pos, line, col });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek_at(1) == Some('/') => cur.bump_while(|c| c != '\n'),
            Some('/') if cur.peek_at(1) == Some('*') => {
                cur.bump();
                cur.bump();
                while !cur.rest().is_empty() && !cur.rest().starts_with("*/") {
                    cur.bump();
                }
                cur.bump();
                cur.bump();
            }
            _ => return,
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    let hex = cur.rest().starts_with("0x") || cur.rest().starts_with("0X");
    loop {
        match cur.peek() {
            Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
                cur.bump();
                let exponent = if hex { matches!(c, 'p' | 'P') } else { matches!(c, 'e' | 'E') };
                if exponent && matches!(cur.peek(), Some('+' | '-')) {
                    cur.bump();
                }
            }
            Some('.') if cur.peek_at(1).is_none_or(|d| !d.is_alphabetic() || d.is_ascii_digit()) => {
                cur.bump();
            }
            // `1.0f`, `2.e3`: a dot followed by a letter only continues a
            // literal when it is an exponent or type suffix.
            Some('.') if cur.peek_at(1).is_some_and(|d| matches!(d, 'e' | 'E' | 'f' | 'F' | 'd' | 'D'))
                && !cur.peek_at(2).is_some_and(|d| d.is_alphanumeric()) =>
            {
                cur.bump();
            }
            _ => return,
        }
    }
}

fn lex_string(cur: &mut Cursor<'_>) -> TokenKind {
    if cur.rest().starts_with("\"\"\"") {
        for _ in 0..3 {
            cur.bump();
        }
        while !cur.rest().is_empty() {
            if cur.rest().starts_with("\\") {
                cur.bump();
                cur.bump();
            } else if cur.rest().starts_with("\"\"\"") {
                for _ in 0..3 {
                    cur.bump();
                }
                return TokenKind::Str;
            } else {
                cur.bump();
            }
        }
        return TokenKind::Error;
    }
    quoted(cur, '"', TokenKind::Str)
}

fn lex_char(cur: &mut Cursor<'_>) -> TokenKind {
    quoted(cur, '\'', TokenKind::Char)
}

fn quoted(cur: &mut Cursor<'_>, quote: char, kind: TokenKind) -> TokenKind {
    cur.bump();
    loop {
        match cur.peek() {
            None | Some('\n') => return TokenKind::Error,
            Some('\\') => {
                cur.bump();
                if cur.peek() != Some('\n') {
                    cur.bump();
                }
            }
            Some(c) if c == quote => {
                cur.bump();
                return kind;
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}
