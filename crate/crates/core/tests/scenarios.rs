mod support;

use std::fs::File;
use std::io::BufReader;

use apiglance_core::harness::{compare, read_trace, replay, TraceEvent};
use apiglance_core::service::{ResolveRequest, SearchRequest};
use apiglance_core::{Config, Engine, IntentKind, Mode};

fn trace(name: &str) -> Vec<TraceEvent> {
    let file = File::open(support::fixtures().join("traces").join(name)).unwrap();
    read_trace(BufReader::new(file)).unwrap()
}

#[test]
fn count_under_cursor_fills_both_panes() {
    let engine = support::fixture_engine();
    let req = ResolveRequest {
        source: "<?php\n$friends = array(\"Ann\", \"Bob\");\n$n = count($friends);\n".into(),
        line: 3,
        col: 8,
        mode: Mode::Reading,
    };
    let r = engine.handle_resolve(&req).unwrap();
    assert_eq!(r.intent.kind, IntentKind::Exact);
    assert_eq!(r.intent.exact_api(), Some("count"));
    let doc = r.doc.unwrap();
    assert_eq!(doc.name, "count");
    assert!(doc.signature.starts_with("int count("));
    assert!(!r.examples.is_empty());
    for ex in &r.examples {
        assert!(ex.example.call_count("count") >= 1);
    }
    assert!(r.is_local_hit());
}

#[test]
fn strcmp_matches_golden() {
    let engine = support::fixture_engine();
    let doc = engine.handle_doc("strcmp").unwrap();
    let golden = std::fs::read_to_string(support::fixtures().join("golden/strcmp_doc.json")).unwrap();
    let expected: serde_json::Value = serde_json::from_str(&golden).unwrap();
    assert_eq!(serde_json::to_value(doc).unwrap(), expected);
}

#[test]
fn read_file_task_search() {
    let engine = support::fixture_engine();
    let hits = engine
        .handle_task_search(&SearchRequest { query: "read file".into(), limit: None })
        .unwrap();
    assert_eq!(hits[0].example.id, "ex-read-file");
    let first = hits[0].example;
    for api in ["fopen", "fread", "fclose"] {
        assert!(first.call_count(api) >= 1, "{api}");
    }
}

#[test]
fn comment_mention_is_not_a_call() {
    let index = support::fixture_index();
    let ids = index.ids_for_api("fopen");
    assert!(!ids.contains("ex-comment-only-fopen"));
    assert!(index.ids_for_keyword("fopen").contains("ex-comment-only-fopen"));
}

#[test]
fn reading_trace_counts() {
    let engine = support::fixture_engine();
    let events = trace("reading_task.jsonl");
    let m = replay(&events, &engine).unwrap();
    assert_eq!(m.counts.api_lookups, 10);
    assert_eq!(m.counts.miss, 2);
    assert_eq!(m.counts.resolved_locally, 8);
    assert_eq!(m.counts.doc_only, 0);
    let again = replay(&events, &engine).unwrap();
    assert_eq!(again.counts, m.counts);
    assert_eq!(again.local_resolution_rate, m.local_resolution_rate);
}

#[test]
fn writing_trace_counts() {
    let engine = support::fixture_engine();
    let m = replay(&trace("writing_task.jsonl"), &engine).unwrap();
    assert_eq!(m.counts.events_total, 9);
    assert_eq!(m.counts.api_lookups, 8);
    assert_eq!(m.counts.resolved_locally, 4);
    assert_eq!(m.counts.miss, 4);
    assert_eq!(m.counts.task_searches, 1);
}

#[test]
fn truncated_catalog_misses_more() {
    let full = support::fixture_engine();
    let mut catalog = full.catalog().clone();
    catalog.retain(|n| n == "count" || n == "strcmp");
    let truncated = Engine::new(catalog, full.index().clone(), Config::default());
    let events = trace("reading_task.jsonl");
    let a = replay(&events, &full).unwrap();
    let b = replay(&events, &truncated).unwrap();
    assert_eq!(b.counts.miss, 8);
    let cmp = compare(&a, &b);
    assert_eq!(cmp.delta.miss, -6);
    assert!(cmp.warnings.is_empty());
}
