//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use apiglance_core::docs::Relation;
use apiglance_core::examples::{ingest_manifest, ExampleIndex};
use apiglance_core::harness::{compare, read_trace, replay, TraceEvent};
use apiglance_core::lexer::{extract_call_sites, tokenize};
use apiglance_core::service::SearchRequest;
use apiglance_core::{synthetic, Config, Engine, EngineHandle, RankingConfig};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const FIG1_BUDGET: Duration = Duration::from_secs(1);
const LEXER_SNIPPETS: usize = 10_000;
const ORACLE_TRIALS: u64 = 200;
const PREFIX_TRIALS: usize = 500;
const MANIFEST_ORDERS: usize = 10;
const LATENCY_REQUESTS: usize = 1_000;
const LATENCY_P95_MS: f64 = 50.0;
const GENERATION_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn resolve_req(body: &Value) -> Request<Body> {
    Request::post("/api/resolve")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn fig1(rt: &tokio::runtime::Runtime) -> Outcome {
    let app = apiglance::router(Arc::new(EngineHandle::new(support::fixture_engine())), None);
    let body = json!({
        "source": "<?php\n$friends = array(\"Ann\", \"Bob\");\n$n = count($friends);\necho $n;\n",
        "line": 3, "col": 8, "mode": "reading"
    });
    let started = Instant::now();
    let (status, v) = rt.block_on(call(&app, resolve_req(&body)));
    let took = started.elapsed();
    ensure(status == StatusCode::OK, || format!("status {status}"))?;
    ensure(v["intent"]["kind"] == "exact" && v["intent"]["api"] == "count", || {
        format!("intent {}", v["intent"])
    })?;
    ensure(v["doc"]["name"] == "count", || "no doc entry for count".into())?;
    let examples = v["examples"].as_array().cloned().unwrap_or_default();
    let with_call = examples
        .iter()
        .filter(|e| e["source"].as_str().is_some_and(|s| s.contains("count(")))
        .count();
    ensure(with_call >= 1, || "no example contains count(".into())?;
    ensure(took < FIG1_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("{} examples, {:.2} ms", examples.len(), took.as_secs_f64() * 1e3))
}

fn strcmp_golden() -> Outcome {
    let engine = support::fixture_engine();
    let doc = engine.handle_doc("strcmp").map_err(|e| e.message)?;
    let golden = fs::read_to_string(support::fixtures().join("golden/strcmp_doc.json"))
        .map_err(|e| e.to_string())?;
    let expected: Value = serde_json::from_str(&golden).map_err(|e| e.to_string())?;
    ensure(serde_json::to_value(doc).unwrap() == expected, || "differs from golden file".into())?;
    let values: Vec<&str> = doc.returns.values.iter().map(|v| v.value.as_str()).collect();
    ensure(values == ["0", "1", "-1"], || format!("return values {values:?}"))?;
    ensure(doc.signature == "int strcmp($str1, $str2)", || doc.signature.clone())?;
    Ok("0, 1, -1 with meanings".into())
}

fn fread_requires_fopen() -> Outcome {
    let catalog = support::fixture_catalog();
    let fread = catalog.lookup("fread").map_err(|e| e.to_string())?;
    ensure(
        fread.related.iter().any(|r| r.name == "fopen" && r.relation == Relation::Requires),
        || format!("related {:?}", fread.related),
    )?;
    ensure(catalog.get("fopen").is_some(), || "fopen not documented".into())?;
    Ok("fread requires fopen".into())
}

fn lexer_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e7e5);
    let mut failures = 0;
    let mut bytes = 0;
    for _ in 0..LEXER_SNIPPETS {
        let src = support::php_like_snippet(&mut rng);
        bytes += src.len();
        let joined: String = tokenize(&src).iter().map(|t| t.lexeme).collect();
        if joined != src {
            failures += 1;
        }
    }
    ensure(failures == 0, || format!("{failures} of {LEXER_SNIPPETS} snippets differ"))?;
    Ok(format!("{LEXER_SNIPPETS} snippets, {bytes} bytes, 0 failures"))
}

fn index_oracle() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for trial in 0..ORACLE_TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let corpus = support::oracle_corpus(&mut rng, 100, 30);
        let index = ExampleIndex::build(corpus.sources.clone(), RankingConfig::default())
            .map_err(|e| e.to_string())?;
        let lexed: Vec<BTreeSet<String>> = corpus
            .sources
            .iter()
            .map(|s| extract_call_sites(&tokenize(&s.source)).into_iter().map(|c| c.callee).collect())
            .collect();
        for api in &corpus.apis {
            let brute: BTreeSet<&str> = corpus
                .sources
                .iter()
                .zip(&lexed)
                .filter(|(_, calls)| calls.contains(api))
                .map(|(s, _)| s.id.as_str())
                .collect();
            let truth: BTreeSet<&str> = corpus
                .sources
                .iter()
                .zip(&corpus.truth)
                .filter(|(_, calls)| calls.contains_key(api))
                .map(|(s, _)| s.id.as_str())
                .collect();
            let got: BTreeSet<&str> = index
                .examples_for_api(api, usize::MAX)
                .iter()
                .map(|r| r.example.id.as_str())
                .collect();
            checked += 1;
            if got != brute || got != truth {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of {checked} API sets differ"))?;
    Ok(format!("{ORACLE_TRIALS} trials, {checked} API sets, 0 mismatches"))
}

fn prefix_oracle() -> Outcome {
    let catalog = support::fixture_catalog();
    let names: Vec<String> = catalog.names().map(str::to_owned).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    let mut mismatches = 0;
    for _ in 0..PREFIX_TRIALS {
        // Mostly real prefixes, some random strings that may match nothing.
        let prefix: String = if rng.random_bool(0.8) {
            let name = names.choose(&mut rng).unwrap();
            name[..rng.random_range(0..=name.len())].to_owned()
        } else {
            (0..rng.random_range(1..4))
                .map(|_| *b"abcdefgimnoprstuxz_".choose(&mut rng).unwrap() as char)
                .collect()
        };
        let mut brute: Vec<String> = names.iter().filter(|n| n.starts_with(&prefix)).cloned().collect();
        brute.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        if catalog.prefix_search(&prefix, names.len()) != brute {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of {PREFIX_TRIALS} prefixes differ"))?;
    Ok(format!("{PREFIX_TRIALS} prefixes over {} names, 0 mismatches", names.len()))
}

/// Every query the corpus can answer, serialized.
fn all_answers(engine: &Engine) -> String {
    let mut out = String::new();
    let mut apis: BTreeSet<String> = engine.catalog().names().map(str::to_owned).collect();
    apis.extend(engine.index().api_names().map(str::to_owned));
    for api in &apis {
        out += &serde_json::to_string(&engine.handle_examples(api, None).unwrap()).unwrap();
    }
    for q in ["read file", "count", "compare strings", "sort users", "json", "string"] {
        let req = SearchRequest { query: q.into(), limit: Some(50) };
        out += &serde_json::to_string(&engine.handle_task_search(&req).unwrap()).unwrap();
    }
    let program = fs::read_to_string(support::fixtures().join("programs/reading_task.php")).unwrap();
    for (i, line) in program.split('\n').enumerate() {
        for col in 1..=line.chars().count() as u32 + 1 {
            let req = apiglance_core::service::ResolveRequest {
                source: program.clone(),
                line: i as u32 + 1,
                col,
                mode: apiglance_core::Mode::Reading,
            };
            let mut v = serde_json::to_value(engine.handle_resolve(&req).unwrap()).unwrap();
            v["elapsed_ms"] = Value::Null;
            out += &v.to_string();
        }
    }
    out
}

fn permutation_invariance() -> Outcome {
    let dir = support::fixtures().join("examples");
    let manifest = fs::read_to_string(dir.join("manifest.jsonl")).map_err(|e| e.to_string())?;
    let mut lines: Vec<Value> = manifest
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for rec in &mut lines {
        let path = dir.join(rec["path"].as_str().unwrap());
        rec["path"] = Value::String(path.to_str().unwrap().to_owned());
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut reference: Option<String> = None;
    for order in 0..MANIFEST_ORDERS {
        lines.shuffle(&mut rng);
        let text: String = lines.iter().map(|l| l.to_string() + "\n").collect();
        let path = tmp.path().join(format!("manifest-{order}.jsonl"));
        fs::write(&path, text).map_err(|e| e.to_string())?;
        let (index, _) = ingest_manifest(&path, RankingConfig::default()).map_err(|e| e.to_string())?;
        let answers = all_answers(&Engine::new(support::fixture_catalog(), index, Config::default()));
        match &reference {
            None => reference = Some(answers),
            Some(r) => ensure(*r == answers, || format!("order {order} differs"))?,
        }
    }
    Ok(format!(
        "{MANIFEST_ORDERS} orders, {} bytes of answers identical",
        reference.map_or(0, |r| r.len())
    ))
}

fn latency(rt: &tokio::runtime::Runtime) -> Outcome {
    let started = Instant::now();
    let corpus = synthetic::generate(42, 10_000, 1_000);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    corpus.write_to(tmp.path()).map_err(|e| e.to_string())?;
    let catalog = corpus.catalog();
    let (index, _) = ingest_manifest(&tmp.path().join("manifest.jsonl"), RankingConfig::default())
        .map_err(|e| e.to_string())?;
    let generation = started.elapsed();
    ensure(generation < GENERATION_BUDGET, || format!("generation took {generation:?}"))?;
    ensure(index.len() == 10_000 && catalog.len() == 1_000, || "corpus size".into())?;

    let app = apiglance::router(
        Arc::new(EngineHandle::new(Engine::new(catalog, index, Config::default()))),
        None,
    );
    let requests = corpus.sample_requests(7, LATENCY_REQUESTS, 40);
    let mut samples = Vec::with_capacity(requests.len());
    rt.block_on(async {
        for req in &requests {
            let body = serde_json::to_value(req).unwrap();
            let t = Instant::now();
            let (status, _) = call(&app, resolve_req(&body)).await;
            samples.push(t.elapsed().as_secs_f64() * 1e3);
            assert_eq!(status, StatusCode::OK);
        }
    });
    samples.sort_by(f64::total_cmp);
    let p50 = apiglance_core::harness::percentile(&samples, 50.0);
    let p95 = apiglance_core::harness::percentile(&samples, 95.0);
    ensure(p95 <= LATENCY_P95_MS, || format!("p95 {p95:.3} ms > {LATENCY_P95_MS} ms"))?;
    Ok(format!(
        "p50 {p50:.3} ms, p95 {p95:.3} ms over {LATENCY_REQUESTS} requests; corpus built in {:.1} s",
        generation.as_secs_f64()
    ))
}

fn harness_criteria() -> Outcome {
    let file = fs::File::open(support::fixtures().join("traces/reading_task.jsonl")).map_err(|e| e.to_string())?;
    let events: Vec<TraceEvent> = read_trace(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    let engine = support::fixture_engine();
    let a = replay(&events, &engine).map_err(|e| e.to_string())?;
    let again = replay(&events, &engine).map_err(|e| e.to_string())?;
    ensure(a.counts.miss == 2, || format!("miss {}", a.counts.miss))?;
    ensure(
        a.counts == again.counts && a.local_resolution_rate == again.local_resolution_rate,
        || "replays differ".into(),
    )?;
    let mut catalog = engine.catalog().clone();
    catalog.retain(|n| n == "count" || n == "strcmp");
    let truncated = Engine::new(catalog, engine.index().clone(), Config::default());
    let b = replay(&events, &truncated).map_err(|e| e.to_string())?;
    ensure(b.counts.miss > a.counts.miss, || format!("truncated miss {}", b.counts.miss))?;
    let delta = compare(&a, &b).delta.miss;
    Ok(format!("miss 2, repeat identical, truncated miss {} (delta {delta})", b.counts.miss))
}

fn main() {
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let criteria: Vec<(&str, Check<'_>)> = vec![
        ("fig1_count_scenario", Box::new(|| fig1(&rt))),
        ("strcmp_golden_doc", Box::new(strcmp_golden)),
        ("fread_requires_fopen", Box::new(fread_requires_fopen)),
        ("lexer_round_trip", Box::new(lexer_round_trip)),
        ("index_oracle_equivalence", Box::new(index_oracle)),
        ("prefix_oracle_equivalence", Box::new(prefix_oracle)),
        ("manifest_order_determinism", Box::new(permutation_invariance)),
        ("resolve_latency_p95", Box::new(|| latency(&rt))),
        ("harness_reading_trace", Box::new(harness_criteria)),
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
