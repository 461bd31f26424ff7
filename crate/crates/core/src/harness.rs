//! Session replay.
//!
//! A trace is a JSON-lines log of editor events. Replaying it against an
//! engine counts how many API lookups could be answered locally and how
//! many would have sent the programmer to an external search engine.
//!
//! Every cursor event is one API lookup and lands in exactly one bucket:
//!
//! * `resolved_locally`: exact intent, documentation and at least one example;
//! * `doc_only`: exact intent and documentation, but no example;
//! * `miss`: anything else (no intent, a prefix still being typed, or an
//!   API without documentation). These are the would-be external queries.

use std::fmt;
use std::io::BufRead;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::{IntentKind, Mode};
use crate::service::{Engine, ResolveRequest, SearchRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TraceEvent {
    Cursor {
        t_ms: u64,
        source: String,
        line: u32,
        col: u32,
        mode: Mode,
    },
    #[serde(alias = "task_search")]
    TaskSearch { t_ms: u64, query: String },
}

impl TraceEvent {
    pub fn t_ms(&self) -> u64 {
        match self {
            TraceEvent::Cursor { t_ms, .. } | TraceEvent::TaskSearch { t_ms, .. } => *t_ms,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trace line {line}: cursor event rejected: {message}")]
    BadCursor { line: usize, message: String },
}

/// Parse a trace, enforcing non-decreasing timestamps.
pub fn read_trace(reader: impl BufRead) -> Result<Vec<TraceEvent>, TraceError> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let malformed = |message: String| TraceError::Malformed {
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if let Some(prev) = events.last() {
            if event.t_ms() < prev.t_ms() {
                return Err(malformed(format!(
                    "t_ms {} is earlier than the previous event ({})",
                    event.t_ms(),
                    prev.t_ms()
                )));
            }
        }
        events.push(event);
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub events_total: u64,
    pub api_lookups: u64,
    pub resolved_locally: u64,
    pub doc_only: u64,
    pub miss: u64,
    pub task_searches: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    #[serde(flatten)]
    pub counts: Counts,
    pub local_resolution_rate: f64,
    pub latency_p50_ms: f64,
    pub latency_p95_ms: f64,
}

impl SessionMetrics {
    fn from_counts(counts: Counts, latencies: &mut [f64]) -> Self {
        let rate = if counts.api_lookups == 0 {
            1.0
        } else {
            counts.resolved_locally as f64 / counts.api_lookups as f64
        };
        latencies.sort_by(f64::total_cmp);
        SessionMetrics {
            counts,
            local_resolution_rate: rate,
            latency_p50_ms: percentile(latencies, 50.0),
            latency_p95_ms: percentile(latencies, 95.0),
        }
    }
}

/// Nearest-rank percentile of sorted samples; 0 for no samples.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Issue every event against `engine` in order and aggregate the buckets.
/// `line` numbers in errors are 1-based event positions.
pub fn replay(events: &[TraceEvent], engine: &Engine) -> Result<SessionMetrics, TraceError> {
    let mut counts = Counts::default();
    let mut latencies = Vec::new();

    for (i, event) in events.iter().enumerate() {
        counts.events_total += 1;
        match event {
            TraceEvent::Cursor {
                source,
                line,
                col,
                mode,
                ..
            } => {
                let req = ResolveRequest {
                    source: source.clone(),
                    line: *line,
                    col: *col,
                    mode: *mode,
                };
                let started = Instant::now();
                let result = engine.handle_resolve(&req).map_err(|e| TraceError::BadCursor {
                    line: i + 1,
                    message: e.message,
                })?;
                latencies.push(started.elapsed().as_secs_f64() * 1000.0);

                counts.api_lookups += 1;
                let documented = result.intent.kind == IntentKind::Exact && result.doc.is_some();
                if documented && !result.examples.is_empty() {
                    counts.resolved_locally += 1;
                } else if documented {
                    counts.doc_only += 1;
                } else {
                    counts.miss += 1;
                }
            }
            TraceEvent::TaskSearch { query, .. } => {
                counts.task_searches += 1;
                // An empty box submission is still a search the user made.
                let _ = engine.handle_task_search(&SearchRequest {
                    query: query.clone(),
                    limit: None,
                });
            }
        }
    }
    Ok(SessionMetrics::from_counts(counts, &mut latencies))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsDelta {
    pub events_total: i64,
    pub api_lookups: i64,
    pub resolved_locally: i64,
    pub doc_only: i64,
    pub miss: i64,
    pub task_searches: i64,
    pub local_resolution_rate: f64,
}

/// Side-by-side comparison; every delta is `a - b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: SessionMetrics,
    pub b: SessionMetrics,
    pub delta: MetricsDelta,
    pub warnings: Vec<String>,
}

pub fn compare(a: &SessionMetrics, b: &SessionMetrics) -> Comparison {
    let d = |x: u64, y: u64| x as i64 - y as i64;
    let (ca, cb) = (a.counts, b.counts);
    let mut warnings = Vec::new();
    if ca.events_total != cb.events_total {
        warnings.push(format!(
            "event counts differ ({} vs {}); the traces may not be comparable",
            ca.events_total, cb.events_total
        ));
    }
    Comparison {
        a: a.clone(),
        b: b.clone(),
        delta: MetricsDelta {
            events_total: d(ca.events_total, cb.events_total),
            api_lookups: d(ca.api_lookups, cb.api_lookups),
            resolved_locally: d(ca.resolved_locally, cb.resolved_locally),
            doc_only: d(ca.doc_only, cb.doc_only),
            miss: d(ca.miss, cb.miss),
            task_searches: d(ca.task_searches, cb.task_searches),
            local_resolution_rate: a.local_resolution_rate - b.local_resolution_rate,
        },
        warnings,
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, d) = (&self.a.counts, &self.b.counts, &self.delta);
        writeln!(f, "{:<22} {:>10} {:>10} {:>10}", "metric", "a", "b", "a - b")?;
        let rows = [
            ("events_total", a.events_total, b.events_total, d.events_total),
            ("api_lookups", a.api_lookups, b.api_lookups, d.api_lookups),
            ("resolved_locally", a.resolved_locally, b.resolved_locally, d.resolved_locally),
            ("doc_only", a.doc_only, b.doc_only, d.doc_only),
            ("miss", a.miss, b.miss, d.miss),
            ("task_searches", a.task_searches, b.task_searches, d.task_searches),
        ];
        for (name, x, y, delta) in rows {
            writeln!(f, "{name:<22} {x:>10} {y:>10} {delta:>+10}")?;
        }
        writeln!(
            f,
            "{:<22} {:>10.4} {:>10.4} {:>+10.4}",
            "local_resolution_rate",
            self.a.local_resolution_rate,
            self.b.local_resolution_rate,
            d.local_resolution_rate
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
