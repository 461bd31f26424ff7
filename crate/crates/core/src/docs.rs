//! The API documentation catalog.
//!
//! Documentation comes from a JSON-lines corpus, one record per API:
//!
//! ```json
//! {"name":"strcmp","signature":"int strcmp($str1, $str2)","summary":"...",
//!  "params":[{"name":"$str1","type":"string","description":"..."}],
//!  "returns":{"type":"int","description":"...","values":[{"value":"0","meaning":"..."}]},
//!  "related":[{"name":"strcasecmp","relation":"see-also"}],
//!  "category":"strings","source_url":"https://..."}
//! ```
//!
//! Keys are lowercased on ingest; PHP function names are case-insensitive.
//! Language keywords such as `foreach` are ordinary entries with no params.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};
use std::ops::Bound;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::{sort_by_length_then_name, NameCatalog};
use crate::lexer::{is_ident_char, is_ident_start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// The related API must be called first (`fread` requires `fopen`).
    Requires,
    /// This API's result is an input of the related API.
    ProducesInputFor,
    SeeAlso,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Requires => "requires",
            Relation::ProducesInputFor => "produces-input-for",
            Relation::SeeAlso => "see-also",
        }
    }

    pub fn parse(tag: &str) -> Option<Relation> {
        [Relation::Requires, Relation::ProducesInputFor, Relation::SeeAlso]
            .into_iter()
            .find(|r| r.as_str() == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(rename = "type", default)]
    pub type_text: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnValue {
    pub value: String,
    #[serde(default)]
    pub meaning: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Returns {
    #[serde(rename = "type", default)]
    pub type_text: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub values: Vec<ReturnValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatedApi {
    pub name: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiDocEntry {
    pub name: String,
    pub display_name: String,
    pub signature: String,
    pub summary: String,
    pub params: Vec<Param>,
    pub returns: Returns,
    pub related: Vec<RelatedApi>,
    pub category: String,
    pub source_url: String,
}

impl ApiDocEntry {
    pub fn requires(&self) -> impl Iterator<Item = &str> {
        self.related
            .iter()
            .filter(|r| r.relation == Relation::Requires)
            .map(|r| r.name.as_str())
    }

    /// The record this entry was ingested from.
    pub fn to_record(&self) -> DocRecord {
        DocRecord {
            name: Some(self.display_name.clone()),
            signature: Some(self.signature.clone()),
            summary: self.summary.clone(),
            params: self.params.clone(),
            returns: self.returns.clone(),
            related: self
                .related
                .iter()
                .map(|r| RawRelated {
                    name: r.name.clone(),
                    relation: r.relation.as_str().to_owned(),
                })
                .collect(),
            category: self.category.clone(),
            source_url: self.source_url.clone(),
        }
    }
}

/// One line of the doc corpus, as written on disk.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocRecord {
    pub name: Option<String>,
    pub signature: Option<String>,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub params: Vec<Param>,
    #[serde(default)]
    pub returns: Returns,
    #[serde(default)]
    pub related: Vec<RawRelated>,
    #[serde(default)]
    pub category: String,
    #[serde(default)]
    pub source_url: String,
}

/// Relation tags are validated after parsing so one bad tag does not cost
/// the whole record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRelated {
    pub name: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRecord {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DanglingRef {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DocIngestReport {
    /// Records accepted, replacements included.
    pub ingested: usize,
    /// Records that replaced an earlier record with the same name.
    pub replaced: usize,
    /// Related references that point at no catalog entry.
    pub dangling: usize,
    pub skipped: Vec<SkippedRecord>,
    pub dangling_refs: Vec<DanglingRef>,
    /// Non-fatal cleanups, such as dropped duplicate return values.
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DocIngestError {
    #[error("doc corpus unreadable at line {line}: {source}")]
    Unreadable {
        line: usize,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no documentation for {0:?}")]
pub struct NotFound(pub String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocCatalog {
    entries: BTreeMap<String, ApiDocEntry>,
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char)
}

impl DocCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ApiDocEntry> {
        self.entries.values()
    }

    /// Insert or replace; returns the replaced entry.
    pub fn insert(&mut self, entry: ApiDocEntry) -> Option<ApiDocEntry> {
        self.entries.insert(entry.name.clone(), entry)
    }

    /// Keep only the entries whose name satisfies `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.entries.retain(|name, _| keep(name));
    }

    pub fn get(&self, name: &str) -> Option<&ApiDocEntry> {
        self.entries.get(name).or_else(|| {
            let lower = name.to_lowercase();
            (lower != name).then(|| self.entries.get(&lower)).flatten()
        })
    }

    pub fn lookup(&self, name: &str) -> Result<&ApiDocEntry, NotFound> {
        self.get(name).ok_or_else(|| NotFound(name.to_owned()))
    }

    /// Catalog names starting with `prefix` (case-insensitive), shortest
    /// first and then alphabetically. An empty prefix matches everything.
    pub fn prefix_search(&self, prefix: &str, limit: usize) -> Vec<String> {
        let prefix = prefix.to_lowercase();
        let mut names: Vec<String> = self
            .entries
            .range::<str, _>((Bound::Included(prefix.as_str()), Bound::Unbounded))
            .map(|(k, _)| k)
            .take_while(|k| k.starts_with(&prefix))
            .cloned()
            .collect();
        sort_by_length_then_name(&mut names);
        names.truncate(limit);
        names
    }

    /// Write the catalog back out in the doc-corpus format.
    pub fn write_jsonl(&self, mut out: impl Write) -> io::Result<()> {
        for entry in self.entries.values() {
            serde_json::to_writer(&mut out, &entry.to_record())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl NameCatalog for DocCatalog {
    fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    fn names_with_prefix(&self, prefix: &str, limit: usize) -> Vec<String> {
        self.prefix_search(prefix, limit)
    }
}

fn entry_from_record(
    record: DocRecord,
    line: usize,
    warnings: &mut Vec<String>,
) -> Result<ApiDocEntry, String> {
    let display_name = match record.name.map(|n| n.trim().to_owned()) {
        Some(n) if !n.is_empty() => n,
        _ => return Err("missing name".into()),
    };
    let signature = match record.signature.map(|s| s.trim().to_owned()) {
        Some(s) if !s.is_empty() => s,
        _ => return Err(format!("{display_name}: missing signature")),
    };
    let name = display_name.to_lowercase();

    let mut returns = record.returns;
    let mut seen = BTreeSet::new();
    returns.values.retain(|v| {
        let fresh = seen.insert(v.value.clone());
        if !fresh {
            warnings.push(format!(
                "line {line}: {name}: duplicate return value {:?} dropped",
                v.value
            ));
        }
        fresh
    });

    let mut related = Vec::with_capacity(record.related.len());
    for raw in record.related {
        let target = raw.name.trim().to_lowercase();
        let Some(relation) = Relation::parse(&raw.relation) else {
            warnings.push(format!(
                "line {line}: {name}: unknown relation {:?} to {target:?} dropped",
                raw.relation
            ));
            continue;
        };
        if !is_identifier(&target) {
            warnings.push(format!(
                "line {line}: {name}: related name {target:?} is not an identifier, dropped"
            ));
            continue;
        }
        related.push(RelatedApi { name: target, relation });
    }

    Ok(ApiDocEntry {
        name,
        display_name,
        signature,
        summary: record.summary,
        params: record.params,
        returns,
        related,
        category: record.category,
        source_url: record.source_url,
    })
}

/// Build a catalog from a doc-corpus stream. Records that cannot be used are
/// skipped and listed in the report; only an I/O failure (including invalid
/// UTF-8) aborts the ingest.
pub fn ingest_docs(reader: impl BufRead) -> Result<(DocCatalog, DocIngestReport), DocIngestError> {
    let mut catalog = DocCatalog::new();
    let mut report = DocIngestReport::default();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| DocIngestError::Unreadable {
            line: line_no,
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<DocRecord>(&line)
            .map_err(|e| format!("invalid record: {e}"))
            .and_then(|rec| entry_from_record(rec, line_no, &mut report.warnings));
        match parsed {
            Ok(entry) => {
                report.ingested += 1;
                if let Some(old) = catalog.insert(entry) {
                    report.replaced += 1;
                    report
                        .warnings
                        .push(format!("line {line_no}: {} replaces an earlier record", old.name));
                }
            }
            Err(reason) => report.skipped.push(SkippedRecord {
                line: line_no,
                reason,
            }),
        }
    }

    for entry in catalog.entries() {
        for rel in &entry.related {
            if !catalog.contains(&rel.name) {
                report.dangling_refs.push(DanglingRef {
                    from: entry.name.clone(),
                    to: rel.name.clone(),
                });
            }
        }
    }
    report.dangling = report.dangling_refs.len();
    Ok((catalog, report))
}
