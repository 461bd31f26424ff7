//! A lossless lexer for a practical subset of PHP.
//!
//! The lexer never fails. Every byte of the input ends up in exactly one
//! token, so concatenating the lexemes of [`tokenize`]'s output gives back
//! the original buffer. Text outside `<?php ... ?>` blocks is emitted as
//! [`TokenKind::Unknown`] runs; if the buffer contains no opening tag at all
//! it is treated as a bare code fragment, which is what editors send while a
//! file is half written.
//!
//! Heredoc and nowdoc literals are not recognized. Their bodies are lexed as
//! ordinary code.

use serde::Serialize;

/// A 1-based line/column pair. Columns count Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub line: u32,
    pub col: u32,
}

impl Position {
    pub const fn new(line: u32, col: u32) -> Self {
        Position { line, col }
    }
}

/// Half-open source range: `start` is the first character, `end` the
/// position just past the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: Position,
    pub end: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    OpenTag,
    CloseTag,
    Identifier,
    Variable,
    StringLiteral,
    NumberLiteral,
    Comment,
    Punctuation,
    Whitespace,
    Unknown,
}

impl TokenKind {
    /// Tokens that separate a callee from its argument list without
    /// changing the meaning of the call.
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub lexeme: &'a str,
    pub span: Span,
    /// Byte offset of the lexeme in the source buffer.
    pub offset: usize,
}

impl Token<'_> {
    pub fn is_punct(&self, text: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme == text
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.lexeme.len()
    }
}

/// Language constructs that look like calls (`if (`, `isset(`) but are never
/// reported as call sites. Documentation for them is still looked up, as
/// keyword tokens, by the intent resolver.
pub const CALL_KEYWORDS: &[&str] = &[
    "and",
    "array",
    "catch",
    "declare",
    "die",
    "echo",
    "elseif",
    "empty",
    "eval",
    "exit",
    "fn",
    "for",
    "foreach",
    "function",
    "if",
    "include",
    "include_once",
    "isset",
    "list",
    "match",
    "or",
    "print",
    "require",
    "require_once",
    "return",
    "switch",
    "unset",
    "while",
    "xor",
];

pub fn is_call_keyword(lowercase_name: &str) -> bool {
    CALL_KEYWORDS.binary_search(&lowercase_name).is_ok()
}

/// PHP treats every byte at or above 0x80 as a valid identifier byte.
pub fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic() || !c.is_ascii()
}

pub fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit()
}

fn is_php_whitespace(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c')
}

const MULTI_PUNCT: &[&str] = &["?->", "->", "::", "=>"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Html,
    Code,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    at: Position,
    mode: Mode,
    out: Vec<Token<'a>>,
}

/// Split `source` into tokens. Total: malformed code degrades into
/// [`TokenKind::Unknown`] tokens and unterminated literals run to the end.
pub fn tokenize(source: &str) -> Vec<Token<'_>> {
    let mode = if find_open_tag(source, 0).is_some() {
        Mode::Html
    } else {
        Mode::Code
    };
    let mut lexer = Lexer {
        src: source,
        pos: 0,
        at: Position::new(1, 1),
        mode,
        out: Vec::with_capacity(source.len() / 3),
    };
    lexer.run();
    lexer.out
}

/// Byte offset and length of the next `<?php` / `<?=` tag at or after `from`.
fn find_open_tag(src: &str, from: usize) -> Option<(usize, usize)> {
    let bytes = src.as_bytes();
    let mut i = from;
    while let Some(rel) = src[i..].find("<?") {
        let at = i + rel;
        let rest = &bytes[at + 2..];
        if rest.first() == Some(&b'=') {
            return Some((at, 3));
        }
        if rest.len() >= 3 && rest[..3].eq_ignore_ascii_case(b"php") {
            match rest.get(3) {
                None => return Some((at, 5)),
                Some(b) if b.is_ascii_whitespace() => return Some((at, 5)),
                _ => {}
            }
        }
        i = at + 2;
    }
    None
}

impl<'a> Lexer<'a> {
    fn run(&mut self) {
        while self.pos < self.src.len() {
            match self.mode {
                Mode::Html => self.lex_html(),
                Mode::Code => self.lex_code(),
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn emit(&mut self, kind: TokenKind, len: usize) {
        debug_assert!(len > 0);
        let lexeme = &self.src[self.pos..self.pos + len];
        let start = self.at;
        for c in lexeme.chars() {
            if c == '\n' {
                self.at.line += 1;
                self.at.col = 1;
            } else {
                self.at.col += 1;
            }
        }
        self.out.push(Token {
            kind,
            lexeme,
            span: Span { start, end: self.at },
            offset: self.pos,
        });
        self.pos += len;
    }

    fn lex_html(&mut self) {
        match find_open_tag(self.src, self.pos) {
            Some((at, len)) => {
                if at > self.pos {
                    self.emit(TokenKind::Unknown, at - self.pos);
                }
                self.emit(TokenKind::OpenTag, len);
                self.mode = Mode::Code;
            }
            None => {
                let len = self.src.len() - self.pos;
                self.emit(TokenKind::Unknown, len);
            }
        }
    }

    fn lex_code(&mut self) {
        let rest = self.rest();
        let mut chars = rest.chars();
        let c = chars.next().expect("lex_code called at end of input");
        let next = chars.next();

        if is_php_whitespace(c) {
            let len = run_len(rest, is_php_whitespace);
            self.emit(TokenKind::Whitespace, len);
        } else if rest.starts_with("?>") {
            self.emit(TokenKind::CloseTag, 2);
            self.mode = Mode::Html;
        } else if rest.starts_with("<?php") || rest.starts_with("<?=") {
            // Stray opening tag inside code: keep it as a tag token.
            let len = if rest.starts_with("<?=") { 3 } else { 5 };
            self.emit(TokenKind::OpenTag, len);
        } else if c == '#' || (c == '/' && next == Some('/')) {
            self.emit(TokenKind::Comment, line_comment_len(rest));
        } else if c == '/' && next == Some('*') {
            let len = rest[2..].find("*/").map_or(rest.len(), |i| i + 4);
            self.emit(TokenKind::Comment, len);
        } else if c == '\'' || c == '"' || c == '`' {
            self.emit(TokenKind::StringLiteral, quoted_len(rest, c));
        } else if c == '$' && next.is_some_and(is_ident_start) {
            let len = 1 + run_len(&rest[1..], is_ident_char);
            self.emit(TokenKind::Variable, len);
        } else if is_ident_start(c) {
            self.emit(TokenKind::Identifier, run_len(rest, is_ident_char));
        } else if c.is_ascii_digit() || (c == '.' && next.is_some_and(|n| n.is_ascii_digit())) {
            self.emit(TokenKind::NumberLiteral, number_len(rest));
        } else if let Some(p) = MULTI_PUNCT.iter().find(|p| rest.starts_with(**p)) {
            self.emit(TokenKind::Punctuation, p.len());
        } else if c.is_ascii_punctuation() {
            self.emit(TokenKind::Punctuation, 1);
        } else {
            self.emit(TokenKind::Unknown, c.len_utf8());
        }
    }
}

fn run_len(s: &str, pred: impl Fn(char) -> bool) -> usize {
    s.char_indices()
        .find(|&(_, c)| !pred(c))
        .map_or(s.len(), |(i, _)| i)
}

/// A line comment stops before the newline or before a closing `?>`.
fn line_comment_len(s: &str) -> usize {
    let newline = s.find('\n').unwrap_or(s.len());
    let close = s.find("?>").unwrap_or(s.len());
    newline.min(close)
}

fn quoted_len(s: &str, quote: char) -> usize {
    let mut escaped = false;
    for (i, c) in s.char_indices().skip(1) {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == quote {
            return i + 1;
        }
    }
    s.len()
}

fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    if b.len() > 1 && b[0] == b'0' && matches!(b[1], b'x' | b'X' | b'b' | b'B' | b'o' | b'O') {
        return 2 + run_len(&s[2..], |c| c.is_ascii_hexdigit() || c == '_');
    }
    let digits = |c: char| c.is_ascii_digit() || c == '_';
    let mut len = run_len(s, digits);
    if b.get(len) == Some(&b'.') && b.get(len + 1).is_some_and(u8::is_ascii_digit) {
        len += 1 + run_len(&s[len + 1..], digits);
    }
    if matches!(b.get(len), Some(b'e' | b'E')) {
        let mut exp = len + 1;
        if matches!(b.get(exp), Some(b'+' | b'-')) {
            exp += 1;
        }
        if b.get(exp).is_some_and(u8::is_ascii_digit) {
            len = exp + run_len(&s[exp..], digits);
        }
    }
    len
}

/// Source range of a call's argument list. `end` is `None` when the opening
/// parenthesis is never closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParenSpan {
    pub start: Position,
    pub end: Option<Position>,
}

impl ParenSpan {
    /// Inclusive containment: a caret sitting right after `)` still counts.
    pub fn contains(&self, at: Position) -> bool {
        self.start <= at && self.end.is_none_or(|end| at <= end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallSite {
    /// Lowercased function name.
    pub callee: String,
    pub name_span: Span,
    pub paren_span: ParenSpan,
    /// Index of the identifier token in the token list.
    #[serde(skip)]
    pub token_index: usize,
}

impl CallSite {
    pub fn name_contains(&self, at: Position) -> bool {
        self.name_span.start <= at && at <= self.name_span.end
    }
}

fn next_significant(tokens: &[Token<'_>], from: usize) -> Option<usize> {
    (from..tokens.len()).find(|&i| !tokens[i].kind.is_trivia())
}

fn prev_significant(tokens: &[Token<'_>], before: usize) -> Option<usize> {
    (0..before).rev().find(|&i| !tokens[i].kind.is_trivia())
}

/// Identifiers after these tokens are members, declarations or constructors,
/// not free function calls.
fn is_non_call_context(tok: &Token<'_>) -> bool {
    match tok.kind {
        TokenKind::Punctuation => matches!(tok.lexeme, "->" | "?->" | "::"),
        TokenKind::Identifier => {
            tok.lexeme.eq_ignore_ascii_case("function") || tok.lexeme.eq_ignore_ascii_case("new")
        }
        _ => false,
    }
}

/// Find every free function call in document order.
pub fn extract_call_sites(tokens: &[Token<'_>]) -> Vec<CallSite> {
    let mut closing = vec![usize::MAX; tokens.len()];
    let mut open = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.is_punct("(") {
            open.push(i);
        } else if tok.is_punct(")") {
            if let Some(o) = open.pop() {
                closing[o] = i;
            }
        }
    }

    let mut sites = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Identifier {
            continue;
        }
        let Some(paren) = next_significant(tokens, i + 1).filter(|&j| tokens[j].is_punct("("))
        else {
            continue;
        };
        let callee = tok.lexeme.to_lowercase();
        if is_call_keyword(&callee) {
            continue;
        }
        if prev_significant(tokens, i).is_some_and(|p| is_non_call_context(&tokens[p])) {
            continue;
        }
        let close = closing[paren];
        sites.push(CallSite {
            callee,
            name_span: tok.span,
            paren_span: ParenSpan {
                start: tokens[paren].span.start,
                end: (close != usize::MAX).then(|| tokens[close].span.end),
            },
            token_index: i,
        });
    }
    sites
}
