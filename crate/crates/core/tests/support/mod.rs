//! Shared test helpers: fixture loading, random PHP-like snippets and
//! random corpora with known call-site ground truth.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use apiglance_core::docs::{ingest_docs, DocCatalog};
use apiglance_core::examples::{ingest_manifest, ExampleIndex, ExampleSource};
use apiglance_core::{Config, Engine, RankingConfig};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_catalog() -> DocCatalog {
    let file = File::open(fixtures().join("docs.jsonl")).unwrap();
    let (catalog, report) = ingest_docs(BufReader::new(file)).unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    catalog
}

pub fn fixture_index() -> ExampleIndex {
    let (index, report) =
        ingest_manifest(&fixtures().join("examples/manifest.jsonl"), RankingConfig::default())
            .unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    index
}

pub fn fixture_engine() -> Engine {
    Engine::new(fixture_catalog(), fixture_index(), Config::default())
}

const FRAGMENTS: &[&str] = &[
    "<?php ", "<?= ", "?>", "\n", "  ", "\t", "$x", "$friends", "$", "count(", "strcmp($a, $b)",
    "fread(fopen($f, 'r'), 10)", ")", "(", ";", "{", "}", "->", "?->", "::", "=>", "'str'",
    "'esc\\'aped'", "\"dq \\\" $v\"", "\"unterminated", "'", "\"", "// line comment\n",
    "# hash\n", "/* block */", "/* open", "*/", "0x1F", "3.14", "1e10", ".5", "42", "echo ",
    "if (", "foreach ($a as $b)", "function f(", "new Foo(", "$o->m(", "é", "日本", "\u{1}",
    "\r\n", "<p>html</p>", "<?", "?", "`cmd`", "\\", "@", "strc",
];

/// Concatenation of random PHP-ish fragments and random characters.
pub fn php_like_snippet(rng: &mut impl Rng) -> String {
    let parts = rng.random_range(0..40);
    let mut s = String::new();
    for _ in 0..parts {
        if rng.random_bool(0.15) {
            s.push(rng.random::<char>());
        } else {
            s.push_str(FRAGMENTS.choose(rng).unwrap());
        }
    }
    s
}

/// A random example corpus where the true free-call multiset of every
/// example is recorded as the source is generated.
pub struct OracleCorpus {
    pub apis: Vec<String>,
    pub sources: Vec<ExampleSource>,
    pub truth: Vec<BTreeMap<String, u32>>,
}

pub fn oracle_corpus(rng: &mut impl Rng, max_examples: usize, max_apis: usize) -> OracleCorpus {
    let n_apis = rng.random_range(1..=max_apis);
    let apis: Vec<String> = (0..n_apis).map(|i| format!("api{i}_{}", ["x", "read", "get"][i % 3])).collect();
    let n_examples = rng.random_range(0..=max_examples);
    let mut sources = Vec::new();
    let mut truth = Vec::new();
    for e in 0..n_examples {
        let mut src = String::from("<?php\n");
        let mut calls = BTreeMap::new();
        for _ in 0..rng.random_range(0..12) {
            let api = apis.choose(rng).unwrap();
            let shown = if rng.random_bool(0.2) { api.to_uppercase() } else { api.clone() };
            match rng.random_range(0..9) {
                0 => src.push_str(&format!("$s = \"{shown}(1)\";\n")),
                1 => src.push_str(&format!("// {shown}($x)\n")),
                2 => src.push_str(&format!("/* {shown}() */\n")),
                3 => src.push_str(&format!("$o->{shown}($x);\n")),
                4 => src.push_str(&format!("function {shown}($y) {{}}\n")),
                5 => src.push_str(&format!("$v = {shown};\n")),
                6 => {
                    src.push_str(&format!("${shown} = {shown} /* c */ (\n  $a,\n  'b'\n);\n"));
                    *calls.entry(api.clone()).or_insert(0) += 1;
                }
                _ => {
                    let inner = apis.choose(rng).unwrap();
                    src.push_str(&format!("$r = {shown}({inner}($q), 'x');\n"));
                    *calls.entry(api.clone()).or_insert(0) += 1;
                    *calls.entry(inner.clone()).or_insert(0) += 1;
                }
            }
        }
        sources.push(ExampleSource {
            id: format!("e{e:03}"),
            title: format!("example {e}"),
            source: src,
            source_url: String::new(),
        });
        truth.push(calls);
    }
    OracleCorpus { apis, sources, truth }
}
