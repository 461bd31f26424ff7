//! Cursor-to-API resolution.
//!
//! In reading mode the cursor rests on existing code and the resolver picks
//! a call site on the cursor line. In writing mode the user is typing and
//! the identifier fragment ending at the cursor is matched against the
//! catalog, first exactly and then as a prefix.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{self, CallSite, Position, Token, TokenKind};

/// Fragments shorter than this never produce suggestions.
pub const MIN_PREFIX_LEN: usize = 2;
/// Maximum number of prefix candidates returned.
pub const CANDIDATE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reading,
    Writing,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reading" => Ok(Mode::Reading),
            "writing" => Ok(Mode::Writing),
            other => Err(format!("unknown mode {other:?}, expected reading or writing")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CursorContext<'a> {
    pub source: &'a str,
    pub line: u32,
    pub col: u32,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentKind {
    Exact,
    Prefix,
    Miss,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedIntent {
    pub kind: IntentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternates: Vec<String>,
}

impl ResolvedIntent {
    pub fn exact(api: impl Into<String>, alternates: Vec<String>) -> Self {
        ResolvedIntent {
            kind: IntentKind::Exact,
            api: Some(api.into()),
            candidates: Vec::new(),
            alternates,
        }
    }

    pub fn prefix(candidates: Vec<String>) -> Self {
        ResolvedIntent {
            kind: IntentKind::Prefix,
            api: None,
            candidates,
            alternates: Vec::new(),
        }
    }

    pub fn miss(alternates: Vec<String>) -> Self {
        ResolvedIntent {
            kind: IntentKind::Miss,
            api: None,
            candidates: Vec::new(),
            alternates,
        }
    }

    /// The resolved API name, if the intent is exact.
    pub fn exact_api(&self) -> Option<&str> {
        match self.kind {
            IntentKind::Exact => self.api.as_deref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("cursor {line}:{col} is outside the buffer ({reason})")]
    InvalidPosition {
        line: u32,
        col: u32,
        reason: &'static str,
    },
}

/// The set of names the resolver may return.
pub trait NameCatalog {
    fn contains(&self, name: &str) -> bool;

    /// Names starting with `prefix`, ordered by (length, name), at most
    /// `limit` of them.
    fn names_with_prefix(&self, prefix: &str, limit: usize) -> Vec<String>;
}

impl NameCatalog for BTreeSet<String> {
    fn contains(&self, name: &str) -> bool {
        BTreeSet::contains(self, name)
    }

    fn names_with_prefix(&self, prefix: &str, limit: usize) -> Vec<String> {
        let mut names: Vec<String> = self
            .range::<str, _>((std::ops::Bound::Included(prefix), std::ops::Bound::Unbounded))
            .take_while(|n| n.starts_with(prefix))
            .cloned()
            .collect();
        sort_by_length_then_name(&mut names);
        names.truncate(limit);
        names
    }
}

pub fn sort_by_length_then_name(names: &mut [String]) {
    names.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// Validates the cursor and returns the byte offset it points at.
fn cursor_offset(ctx: &CursorContext<'_>) -> Result<usize, IntentError> {
    let invalid = |reason| IntentError::InvalidPosition {
        line: ctx.line,
        col: ctx.col,
        reason,
    };
    if ctx.line == 0 || ctx.col == 0 {
        return Err(invalid("lines and columns are 1-based"));
    }
    let mut line_start = 0;
    for _ in 1..ctx.line {
        match ctx.source[line_start..].find('\n') {
            Some(i) => line_start += i + 1,
            None => return Err(invalid("line past end of buffer")),
        }
    }
    let line_text = ctx.source[line_start..]
        .split('\n')
        .next()
        .unwrap_or_default();
    let want = (ctx.col - 1) as usize;
    let mut chars = line_text.char_indices().map(|(i, _)| i);
    let within = chars.nth(want).or_else(|| {
        (line_text.chars().count() == want).then_some(line_text.len())
    });
    match within {
        Some(i) => Ok(line_start + i),
        None => Err(invalid("column past end of line")),
    }
}

/// Map a cursor to the API the user most plausibly means.
pub fn resolve(
    ctx: &CursorContext<'_>,
    catalog: &impl NameCatalog,
) -> Result<ResolvedIntent, IntentError> {
    let offset = cursor_offset(ctx)?;
    let tokens = lexer::tokenize(ctx.source);
    let sites = lexer::extract_call_sites(&tokens);
    let cursor = Position::new(ctx.line, ctx.col);

    if ctx.mode == Mode::Writing {
        if let Some(intent) = resolve_fragment(&tokens, offset, catalog) {
            return Ok(intent);
        }
    }
    Ok(resolve_line(&tokens, &sites, cursor, catalog))
}

/// Writing mode: the identifier run that ends exactly at the cursor.
fn resolve_fragment(
    tokens: &[Token<'_>],
    offset: usize,
    catalog: &impl NameCatalog,
) -> Option<ResolvedIntent> {
    if offset == 0 {
        return None;
    }
    // Token holding the character just before the cursor.
    let idx = tokens.partition_point(|t| t.end_offset() < offset);
    let tok = tokens.get(idx)?;
    if tok.kind != TokenKind::Identifier || tok.offset >= offset {
        return None;
    }
    let fragment = tok.lexeme[..offset - tok.offset].to_lowercase();
    if fragment.chars().count() < MIN_PREFIX_LEN {
        return None;
    }
    if catalog.contains(&fragment) {
        return Some(ResolvedIntent::exact(fragment, Vec::new()));
    }
    let candidates = catalog.names_with_prefix(&fragment, CANDIDATE_CAP);
    (!candidates.is_empty()).then(|| ResolvedIntent::prefix(candidates))
}

/// Reading mode priority: a call containing the cursor, then the nearest call
/// ending before it, then the first call on the line, then a documented
/// keyword token on the line.
fn resolve_line(
    tokens: &[Token<'_>],
    sites: &[CallSite],
    cursor: Position,
    catalog: &impl NameCatalog,
) -> ResolvedIntent {
    let on_line: Vec<&CallSite> = sites
        .iter()
        .filter(|s| s.name_span.start.line == cursor.line)
        .collect();

    let chosen = on_line
        .iter()
        .filter(|s| s.name_contains(cursor) || s.paren_span.contains(cursor))
        .max_by_key(|s| s.name_span.start)
        .or_else(|| {
            on_line
                .iter()
                .filter(|s| s.name_span.end <= cursor)
                .max_by_key(|s| s.name_span.end)
        })
        .or_else(|| on_line.first())
        .copied();

    if let Some(site) = chosen {
        if catalog.contains(&site.callee) {
            let alternates = distinct_names(
                on_line.iter().map(|s| s.callee.as_str()),
                Some(&site.callee),
            );
            return ResolvedIntent::exact(site.callee.clone(), alternates);
        }
        return ResolvedIntent::miss(distinct_names(
            on_line.iter().map(|s| s.callee.as_str()),
            None,
        ));
    }

    let keyword = tokens
        .iter()
        .skip_while(|t| t.span.start.line < cursor.line)
        .take_while(|t| t.span.start.line == cursor.line)
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.lexeme.to_lowercase())
        .find(|name| lexer::is_call_keyword(name) && catalog.contains(name));
    match keyword {
        Some(name) => ResolvedIntent::exact(name, Vec::new()),
        None => ResolvedIntent::miss(Vec::new()),
    }
}

fn distinct_names<'a>(names: impl Iterator<Item = &'a str>, skip: Option<&str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    names
        .filter(|n| Some(*n) != skip && seen.insert(*n))
        .map(str::to_owned)
        .collect()
}
