//! Deterministic synthetic corpora for load testing.
//!
//! [`generate`] builds a doc catalog of generated API names plus an example
//! corpus whose snippets call those APIs with a skewed popularity
//! distribution, so a few APIs have hundreds of examples and most have a
//! handful. The same seed always yields the same corpus.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RankingConfig;
use crate::docs::{self, DocCatalog, DocRecord, Param, RawRelated, ReturnValue, Returns};
use crate::examples::{ExampleIndex, ExampleIngestError, ExampleSource, ManifestRecord};
use crate::intent::Mode;
use crate::service::ResolveRequest;

const VERBS: &[&str] = &[
    "get", "set", "read", "write", "parse", "format", "load", "save", "open", "close", "find",
    "sort", "merge", "split", "join", "encode", "decode", "hash", "check", "build",
];

const NOUNS: &[&str] = &[
    "array", "string", "file", "line", "path", "user", "session", "cookie", "header", "query",
    "row", "column", "table", "cache", "token", "date", "time", "stream", "socket", "buffer",
    "image", "color", "config", "option", "value", "key", "list", "map", "node", "tree", "word",
    "char", "byte", "number", "float", "int", "url", "host", "port", "mail", "form", "field",
    "record", "entry", "item", "event", "error", "log", "report", "page",
];

const FILLER: &[&str] = &[
    "handle", "the", "request", "quickly", "before", "output", "result", "input", "data",
    "validate", "simple", "example", "show", "how", "to", "use",
];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub api_names: Vec<String>,
    pub docs: Vec<DocRecord>,
    pub examples: Vec<ExampleSource>,
}

pub fn api_name(i: usize) -> String {
    let combos = VERBS.len() * NOUNS.len();
    let verb = VERBS[i % VERBS.len()];
    let noun = NOUNS[(i / VERBS.len()) % NOUNS.len()];
    if i < combos {
        format!("{verb}_{noun}")
    } else {
        format!("{verb}_{noun}_{}", i / combos)
    }
}

/// Popular APIs are drawn far more often than the tail.
fn skewed_index(rng: &mut impl Rng, n: usize) -> usize {
    let u: f64 = rng.random();
    ((u * u * u) * n as f64) as usize % n
}

fn phrase(rng: &mut impl Rng, words: usize) -> String {
    (0..words)
        .map(|_| *FILLER.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn doc_record(rng: &mut impl Rng, names: &[String], i: usize) -> DocRecord {
    let name = &names[i];
    let nparams = rng.random_range(0..4);
    let params: Vec<Param> = (0..nparams)
        .map(|p| Param {
            name: format!("$arg{p}"),
            type_text: ["string", "int", "array", "mixed"][p % 4].into(),
            description: phrase(rng, 5),
        })
        .collect();
    let sig_params: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
    let values = (0..rng.random_range(0..4))
        .map(|v| ReturnValue {
            value: ["true", "false", "0", "-1"][v].into(),
            meaning: phrase(rng, 3),
        })
        .collect();
    let related = (0..rng.random_range(0..3))
        .map(|r| RawRelated {
            name: names[rng.random_range(0..names.len())].clone(),
            relation: ["requires", "produces-input-for", "see-also"][r % 3].into(),
        })
        .collect();
    DocRecord {
        name: Some(name.clone()),
        signature: Some(format!("mixed {name}({})", sig_params.join(", "))),
        summary: phrase(rng, 8),
        params,
        returns: Returns {
            type_text: "mixed".into(),
            description: phrase(rng, 6),
            values,
        },
        related,
        category: "synthetic".into(),
        source_url: format!("https://docs.example.org/{name}"),
    }
}

/// A PHP-like program of `lines` lines calling catalog APIs, with a few
/// calls to undocumented helpers and some comments.
pub fn program(rng: &mut impl Rng, names: &[String], lines: usize) -> String {
    let mut out = String::from("<?php\n");
    for l in 1..lines {
        let api = &names[skewed_index(rng, names.len())];
        match rng.random_range(0..10) {
            0 => out.push_str(&format!("// {}\n", phrase(rng, 6))),
            1 => out.push_str(&format!("if ({api}($v{l}) > 0) {{\n    $n{l} = {};\n}}\n", rng.random_range(0..99))),
            2 => out.push_str(&format!("$h{l} = helper_{}($x);\n", rng.random_range(0..20))),
            3 => {
                let other = &names[skewed_index(rng, names.len())];
                out.push_str(&format!("$r{l} = {api}({other}($a), \"{}\");\n", phrase(rng, 2)));
            }
            4 => out.push_str(&format!("$s{l} = 'literal {api}(x) text';\n")),
            _ => out.push_str(&format!("$v{l} = {api}($v{}, {});\n", l.saturating_sub(1), rng.random_range(0..1000))),
        }
    }
    out
}

pub fn generate(seed: u64, n_examples: usize, n_apis: usize) -> SyntheticCorpus {
    assert!(n_apis > 0, "need at least one API");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let api_names: Vec<String> = (0..n_apis).map(api_name).collect();
    let docs = (0..n_apis).map(|i| doc_record(&mut rng, &api_names, i)).collect();
    let examples = (0..n_examples)
        .map(|i| {
            let lines = rng.random_range(4..30);
            let focus = &api_names[skewed_index(&mut rng, n_apis)];
            ExampleSource {
                id: format!("syn-{i:06}"),
                title: format!("{} with {focus}", phrase(&mut rng, 3)),
                source: program(&mut rng, &api_names, lines),
                source_url: format!("https://examples.example.org/{i}"),
            }
        })
        .collect();
    SyntheticCorpus {
        api_names,
        docs,
        examples,
    }
}

impl SyntheticCorpus {
    pub fn catalog(&self) -> DocCatalog {
        let mut text = Vec::new();
        for rec in &self.docs {
            serde_json::to_writer(&mut text, rec).expect("record serializes");
            text.push(b'\n');
        }
        docs::ingest_docs(text.as_slice())
            .expect("in-memory corpus is readable")
            .0
    }

    pub fn index(&self, ranking: RankingConfig) -> Result<ExampleIndex, ExampleIngestError> {
        ExampleIndex::build(self.examples.iter().cloned(), ranking)
    }

    /// Write `docs.jsonl`, `manifest.jsonl` and `src/*.php` under `dir`, the
    /// same layout the `index` command reads.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("src"))?;
        let mut docs = BufWriter::new(fs::File::create(dir.join("docs.jsonl"))?);
        for rec in &self.docs {
            serde_json::to_writer(&mut docs, rec)?;
            docs.write_all(b"\n")?;
        }
        docs.flush()?;
        let mut manifest = BufWriter::new(fs::File::create(dir.join("manifest.jsonl"))?);
        for ex in &self.examples {
            let path = format!("src/{}.php", ex.id);
            fs::write(dir.join(&path), &ex.source)?;
            let rec = ManifestRecord {
                id: ex.id.clone(),
                title: ex.title.clone(),
                path,
                source_url: ex.source_url.clone(),
            };
            serde_json::to_writer(&mut manifest, &rec)?;
            manifest.write_all(b"\n")?;
        }
        manifest.flush()
    }

    /// Editor-sized resolve requests: a fresh program per request with the
    /// cursor on a random character of a random line. About one in five is a
    /// writing-mode request cut off in the middle of an API name.
    pub fn sample_requests(&self, seed: u64, count: usize, lines: usize) -> Vec<ResolveRequest> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let source = program(&mut rng, &self.api_names, lines);
                if rng.random_bool(0.2) {
                    let api = &self.api_names[skewed_index(&mut rng, self.api_names.len())];
                    let cut = rng.random_range(2..=api.len());
                    let source = format!("{source}$typed = {}", &api[..cut]);
                    let last = source.lines().last().unwrap_or_default();
                    return ResolveRequest {
                        line: source.split('\n').count() as u32,
                        col: last.chars().count() as u32 + 1,
                        source,
                        mode: Mode::Writing,
                    };
                }
                let all: Vec<&str> = source.split('\n').collect();
                let line = rng.random_range(1..=all.len());
                let len = all[line - 1].chars().count();
                let col = rng.random_range(1..=len + 1);
                ResolveRequest {
                    source,
                    line: line as u32,
                    col: col as u32,
                    mode: Mode::Reading,
                }
            })
            .collect()
    }
}
