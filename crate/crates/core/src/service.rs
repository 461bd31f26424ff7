//! Request handlers behind the HTTP protocol.
//!
//! Every handler is a pure function of the request, the loaded corpora and
//! the config. The transport layer only has to decode JSON, call one of the
//! `handle_*` methods and encode the result or the [`ServiceError`].

use std::sync::{Arc, RwLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::docs::{ApiDocEntry, DocCatalog};
use crate::examples::{ExampleIndex, RankedExample, SearchError};
use crate::intent::{self, CursorContext, IntentError, IntentKind, Mode, NameCatalog, ResolvedIntent};

/// Largest source buffer accepted by [`Engine::handle_resolve`].
pub const MAX_SOURCE_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveRequest {
    pub source: String,
    pub line: u32,
    pub col: u32,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryResult<'a> {
    pub intent: ResolvedIntent,
    pub doc: Option<&'a ApiDocEntry>,
    pub examples: Vec<RankedExample<'a>>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidPosition,
    SourceTooLarge,
    EmptyQuery,
    NotFound,
    BadRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{message}")]
pub struct ServiceError {
    #[serde(rename = "error")]
    pub code: ErrorCode,
    pub message: String,
}

impl ServiceError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ServiceError {
            code,
            message: message.into(),
        }
    }
}

impl From<IntentError> for ServiceError {
    fn from(e: IntentError) -> Self {
        ServiceError::new(ErrorCode::InvalidPosition, e.to_string())
    }
}

impl From<SearchError> for ServiceError {
    fn from(e: SearchError) -> Self {
        ServiceError::new(ErrorCode::EmptyQuery, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub apis: usize,
    pub examples: usize,
}

/// Loaded corpora plus config. Immutable once built.
#[derive(Debug, Clone)]
pub struct Engine {
    catalog: DocCatalog,
    index: ExampleIndex,
    config: Config,
}

impl Engine {
    pub fn new(catalog: DocCatalog, index: ExampleIndex, config: Config) -> Self {
        Engine {
            catalog,
            index,
            config,
        }
    }

    pub fn catalog(&self) -> &DocCatalog {
        &self.catalog
    }

    pub fn index(&self) -> &ExampleIndex {
        &self.index
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    fn limit(&self, requested: Option<usize>) -> Result<usize, ServiceError> {
        match requested {
            Some(0) => Err(ServiceError::new(ErrorCode::BadRequest, "limit must be at least 1")),
            Some(n) => Ok(n),
            None => Ok(self.config.example_limit),
        }
    }

    pub fn resolve_intent(&self, req: &ResolveRequest) -> Result<ResolvedIntent, ServiceError> {
        if req.source.len() > MAX_SOURCE_BYTES {
            return Err(ServiceError::new(
                ErrorCode::SourceTooLarge,
                format!(
                    "source is {} bytes, the limit is {MAX_SOURCE_BYTES}",
                    req.source.len()
                ),
            ));
        }
        let ctx = CursorContext {
            source: &req.source,
            line: req.line,
            col: req.col,
            mode: req.mode,
        };
        Ok(intent::resolve(&ctx, &self.catalog)?)
    }

    /// Everything both instant panes need for one cursor event.
    pub fn handle_resolve(&self, req: &ResolveRequest) -> Result<QueryResult<'_>, ServiceError> {
        let started = Instant::now();
        let intent = self.resolve_intent(req)?;
        let (doc, examples) = match intent.exact_api() {
            Some(api) => (
                self.catalog.get(api),
                self.index.examples_for_api(api, self.config.example_limit),
            ),
            None => (None, Vec::new()),
        };
        Ok(QueryResult {
            intent,
            doc,
            examples,
            elapsed_ms: started.elapsed().as_secs_f64() * 1000.0,
        })
    }

    pub fn handle_task_search(&self, req: &SearchRequest) -> Result<Vec<RankedExample<'_>>, ServiceError> {
        let limit = self.limit(req.limit)?;
        Ok(self.index.task_search(&req.query, limit)?)
    }

    pub fn handle_doc(&self, name: &str) -> Result<&ApiDocEntry, ServiceError> {
        self.catalog
            .lookup(name)
            .map_err(|e| ServiceError::new(ErrorCode::NotFound, e.to_string()))
    }

    /// `not_found` only when neither corpus knows the name; a documented API
    /// without examples yields an empty list.
    pub fn handle_examples(&self, name: &str, limit: Option<usize>) -> Result<Vec<RankedExample<'_>>, ServiceError> {
        let limit = self.limit(limit)?;
        let lower = name.to_lowercase();
        if !self.catalog.contains(&lower) && !self.index.has_api(&lower) {
            return Err(ServiceError::new(
                ErrorCode::NotFound,
                format!("no documentation or examples for {name:?}"),
            ));
        }
        Ok(self.index.examples_for_api(&lower, limit))
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            apis: self.catalog.len(),
            examples: self.index.len(),
        }
    }
}

impl QueryResult<'_> {
    /// Looked up locally: exact intent with documentation and examples.
    pub fn is_local_hit(&self) -> bool {
        self.intent.kind == IntentKind::Exact && self.doc.is_some() && !self.examples.is_empty()
    }
}

/// Shared handle to the current engine. Readers take a cheap `Arc` snapshot;
/// a reload swaps in a whole new engine between requests.
#[derive(Debug)]
pub struct EngineHandle {
    current: RwLock<Arc<Engine>>,
}

impl EngineHandle {
    pub fn new(engine: Engine) -> Self {
        EngineHandle {
            current: RwLock::new(Arc::new(engine)),
        }
    }

    pub fn snapshot(&self) -> Arc<Engine> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Replace the engine; returns the previous one.
    pub fn swap(&self, engine: Engine) -> Arc<Engine> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        std::mem::replace(&mut *guard, Arc::new(engine))
    }
}
