//! Code-example corpus and its inverted indexes.
//!
//! Every example is lexed once at ingest. Its call sites feed an API index
//! (`count` -> examples calling `count`) and the words in its title and
//! comments feed a keyword index used by task search.
//!
//! API-specific ranking scores an example by how often it calls the API,
//! plus a bonus for being short: `calls + density_bonus / lines`. Task
//! search scores each query word by where it matched. Ties always fall back
//! to ascending example id, so every result list is deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::config::RankingConfig;
use crate::lexer::{self, TokenKind};

/// An exact non-negative rational score. Ordering is exact, so equal
/// scores are genuinely equal and fall through to the id tie-break.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    num: u64,
    den: u64,
}

impl Score {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "score denominator must be positive");
        Score { num, den }
    }

    pub fn integer(n: u64) -> Self {
        Score { num: n, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

/// An example before indexing: what a manifest line plus its source file
/// provide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSource {
    pub id: String,
    pub title: String,
    pub source: String,
    pub source_url: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeExample {
    pub id: String,
    pub title: String,
    pub source: String,
    /// Call-site multiset: callee -> number of calls.
    pub calls: BTreeMap<String, u32>,
    pub line_count: usize,
    pub source_url: String,
    keywords: BTreeSet<String>,
}

impl CodeExample {
    pub fn from_source(src: ExampleSource) -> Self {
        let tokens = lexer::tokenize(&src.source);
        let mut calls = BTreeMap::new();
        for site in lexer::extract_call_sites(&tokens) {
            *calls.entry(site.callee).or_insert(0) += 1;
        }
        let mut keywords: BTreeSet<String> = words(&src.title).collect();
        for tok in tokens.iter().filter(|t| t.kind == TokenKind::Comment) {
            keywords.extend(words(tok.lexeme));
        }
        CodeExample {
            line_count: src.source.lines().count(),
            id: src.id,
            title: src.title,
            source: src.source,
            calls,
            source_url: src.source_url,
            keywords,
        }
    }

    pub fn call_count(&self, api: &str) -> u32 {
        self.calls.get(api).copied().unwrap_or(0)
    }

    /// Lowercased words from the title and comment text.
    pub fn keywords(&self) -> &BTreeSet<String> {
        &self.keywords
    }

    pub fn to_source(&self) -> ExampleSource {
        ExampleSource {
            id: self.id.clone(),
            title: self.title.clone(),
            source: self.source.clone(),
            source_url: self.source_url.clone(),
        }
    }
}

/// Lowercased alphanumeric/underscore words of `text`.
pub fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

#[derive(Debug, Clone, Copy)]
pub struct RankedExample<'a> {
    pub example: &'a CodeExample,
    pub score: Score,
}

impl PartialEq for RankedExample<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.example.id == other.example.id && self.score == other.score
    }
}

impl Serialize for RankedExample<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RankedExample", 4)?;
        st.serialize_field("id", &self.example.id)?;
        st.serialize_field("title", &self.example.title)?;
        st.serialize_field("source", &self.example.source)?;
        st.serialize_field("score", &self.score)?;
        st.end()
    }
}

fn rank_order(a: &(Score, &CodeExample), b: &(Score, &CodeExample)) -> Ordering {
    b.0.cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("task search query is empty")]
    EmptyQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedExample {
    pub id: String,
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExampleIngestReport {
    pub examples: usize,
    pub distinct_apis: usize,
    pub skipped: Vec<SkippedExample>,
}

#[derive(Debug, Error)]
pub enum ExampleIngestError {
    #[error("cannot read manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("manifest line {line}: {message}")]
    MalformedManifest { line: usize, message: String },
    #[error("duplicate example id {0:?}")]
    DuplicateId(String),
}

/// One manifest line. `path` is relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub id: String,
    pub title: String,
    pub path: String,
    #[serde(default)]
    pub source_url: String,
}

/// Immutable example index. Build a new one to change the corpus.
#[derive(Debug, Clone)]
pub struct ExampleIndex {
    /// Sorted by id.
    examples: Vec<CodeExample>,
    /// API name -> example positions, pre-sorted in rank order.
    by_api: HashMap<String, Vec<u32>>,
    by_keyword: HashMap<String, Vec<u32>>,
    ranking: RankingConfig,
}

impl ExampleIndex {
    pub fn build(
        sources: impl IntoIterator<Item = ExampleSource>,
        ranking: RankingConfig,
    ) -> Result<Self, ExampleIngestError> {
        let mut examples: Vec<CodeExample> =
            sources.into_iter().map(CodeExample::from_source).collect();
        examples.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = examples.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ExampleIngestError::DuplicateId(w[0].id.clone()));
        }

        let mut by_api: HashMap<String, Vec<u32>> = HashMap::new();
        let mut by_keyword: HashMap<String, Vec<u32>> = HashMap::new();
        for (pos, ex) in examples.iter().enumerate() {
            for api in ex.calls.keys() {
                by_api.entry(api.clone()).or_default().push(pos as u32);
            }
            for word in &ex.keywords {
                by_keyword.entry(word.clone()).or_default().push(pos as u32);
            }
        }
        let mut index = ExampleIndex {
            examples,
            by_api: HashMap::new(),
            by_keyword,
            ranking,
        };
        for (api, mut postings) in by_api {
            // Positions are in id order already, and the sort is stable.
            postings.sort_by(|&a, &b| {
                let (a, b) = (&index.examples[a as usize], &index.examples[b as usize]);
                index.api_score(b, &api).cmp(&index.api_score(a, &api))
            });
            index.by_api.insert(api, postings);
        }
        Ok(index)
    }

    pub fn ranking(&self) -> RankingConfig {
        self.ranking
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[CodeExample] {
        &self.examples
    }

    pub fn get(&self, id: &str) -> Option<&CodeExample> {
        self.examples
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.examples[i])
    }

    pub fn api_names(&self) -> impl Iterator<Item = &str> {
        self.by_api.keys().map(String::as_str)
    }

    pub fn distinct_apis(&self) -> usize {
        self.by_api.len()
    }

    pub fn has_api(&self, api: &str) -> bool {
        self.by_api.contains_key(&api.to_lowercase())
    }

    /// Ids of examples calling `api` at least once, in id order.
    pub fn ids_for_api(&self, api: &str) -> BTreeSet<&str> {
        self.by_api
            .get(&api.to_lowercase())
            .into_iter()
            .flatten()
            .map(|&p| self.examples[p as usize].id.as_str())
            .collect()
    }

    pub fn ids_for_keyword(&self, word: &str) -> BTreeSet<&str> {
        self.by_keyword
            .get(&word.to_lowercase())
            .into_iter()
            .flatten()
            .map(|&p| self.examples[p as usize].id.as_str())
            .collect()
    }

    pub fn api_score(&self, ex: &CodeExample, api: &str) -> Score {
        let lines = ex.line_count.max(1) as u64;
        let calls = ex.call_count(api) as u64;
        Score::new(calls * lines + self.ranking.density_bonus as u64, lines)
    }

    /// Examples calling `api`, best first.
    pub fn examples_for_api(&self, api: &str, limit: usize) -> Vec<RankedExample<'_>> {
        let api = api.to_lowercase();
        let Some(postings) = self.by_api.get(&api) else {
            return Vec::new();
        };
        postings
            .iter()
            .take(limit)
            .map(|&p| {
                let example = &self.examples[p as usize];
                RankedExample {
                    example,
                    score: self.api_score(example, &api),
                }
            })
            .collect()
    }

    /// Keyword search. Every query word must occur in an example, either as
    /// a called API or as a title/comment word. A word scores
    /// `api_weight` for an API hit plus `keyword_weight` for a keyword hit.
    pub fn task_search(&self, query: &str, limit: usize) -> Result<Vec<RankedExample<'_>>, SearchError> {
        if query.trim().is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let mut seen = BTreeSet::new();
        let terms: Vec<String> = words(query).filter(|w| seen.insert(w.clone())).collect();
        if terms.is_empty() {
            return Ok(Vec::new());
        }

        let postings = |w: &str| -> BTreeSet<u32> {
            let api = self.by_api.get(w).into_iter().flatten();
            let kw = self.by_keyword.get(w).into_iter().flatten();
            api.chain(kw).copied().collect()
        };
        let mut candidates = postings(&terms[0]);
        for term in &terms[1..] {
            if candidates.is_empty() {
                break;
            }
            let next = postings(term);
            candidates.retain(|p| next.contains(p));
        }

        let mut scored: Vec<(Score, &CodeExample)> = candidates
            .into_iter()
            .map(|p| {
                let ex = &self.examples[p as usize];
                let points: u64 = terms
                    .iter()
                    .map(|t| {
                        let api = if ex.calls.contains_key(t) { self.ranking.api_weight } else { 0 };
                        let kw = if ex.keywords.contains(t) { self.ranking.keyword_weight } else { 0 };
                        (api + kw) as u64
                    })
                    .sum();
                (Score::integer(points), ex)
            })
            .collect();
        scored.sort_by(rank_order);
        scored.truncate(limit);
        Ok(scored
            .into_iter()
            .map(|(score, example)| RankedExample { example, score })
            .collect())
    }
}

/// Read a manifest and the source files it names. Unreadable sources are
/// skipped and reported; a malformed manifest line or a duplicate id aborts.
pub fn ingest_manifest(
    manifest: &Path,
    ranking: RankingConfig,
) -> Result<(ExampleIndex, ExampleIngestReport), ExampleIngestError> {
    let file = fs::File::open(manifest).map_err(|source| ExampleIngestError::Manifest {
        path: manifest.to_owned(),
        source,
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut sources = Vec::new();
    let mut report = ExampleIngestReport::default();

    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ExampleIngestError::Manifest {
            path: manifest.to_owned(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord =
            serde_json::from_str(&line).map_err(|e| ExampleIngestError::MalformedManifest {
                line: i + 1,
                message: e.to_string(),
            })?;
        let path = base.join(&rec.path);
        match fs::read_to_string(&path) {
            Ok(source) => sources.push(ExampleSource {
                id: rec.id,
                title: rec.title,
                source,
                source_url: rec.source_url,
            }),
            Err(e) => report.skipped.push(SkippedExample {
                id: rec.id,
                path,
                reason: e.to_string(),
            }),
        }
    }

    let index = ExampleIndex::build(sources, ranking)?;
    report.examples = index.len();
    report.distinct_apis = index.distinct_apis();
    Ok((index, report))
}
