//! HTTP transport for the lookup engine.
//!
//! All bodies are JSON. Errors are `{"error": <code>, "message": <text>}`
//! with a status derived from the code.

use std::path::PathBuf;
use std::sync::Arc;

use apiglance_core::examples::RankedExample;
use apiglance_core::service::{ErrorCode, ResolveRequest, SearchRequest, ServiceError, MAX_SOURCE_BYTES};
use apiglance_core::EngineHandle;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

/// Request bodies may carry a full 1 MiB buffer plus JSON escaping.
const BODY_LIMIT: usize = 4 * MAX_SOURCE_BYTES;

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let code = if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ErrorCode::SourceTooLarge
        } else {
            ErrorCode::BadRequest
        };
        ApiError(ServiceError::new(code, r.body_text()))
    }
}

pub fn status_for(code: ErrorCode) -> StatusCode {
    match code {
        ErrorCode::NotFound => StatusCode::NOT_FOUND,
        ErrorCode::SourceTooLarge => StatusCode::PAYLOAD_TOO_LARGE,
        ErrorCode::InvalidPosition | ErrorCode::EmptyQuery | ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_for(self.0.code), Json(self.0)).into_response()
    }
}

#[derive(Serialize)]
struct ExampleList<'a> {
    examples: Vec<RankedExample<'a>>,
}

#[derive(Deserialize)]
struct LimitParam {
    limit: Option<usize>,
}

type Shared = Arc<EngineHandle>;

async fn resolve(
    State(handle): State<Shared>,
    body: Result<Json<ResolveRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let engine = handle.snapshot();
    let result = engine.handle_resolve(&req)?;
    Ok(Json(result).into_response())
}

async fn search(
    State(handle): State<Shared>,
    body: Result<Json<SearchRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let engine = handle.snapshot();
    let examples = engine.handle_task_search(&req)?;
    Ok(Json(ExampleList { examples }).into_response())
}

async fn doc(State(handle): State<Shared>, Path(name): Path<String>) -> Result<Response, ApiError> {
    let engine = handle.snapshot();
    let entry = engine.handle_doc(&name)?;
    Ok(Json(entry).into_response())
}

async fn examples(
    State(handle): State<Shared>,
    Path(name): Path<String>,
    query: Result<Query<LimitParam>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) =
        query.map_err(|r| ApiError(ServiceError::new(ErrorCode::BadRequest, r.body_text())))?;
    let engine = handle.snapshot();
    let examples = engine.handle_examples(&name, params.limit)?;
    Ok(Json(ExampleList { examples }).into_response())
}

async fn health(State(handle): State<Shared>) -> Response {
    Json(handle.snapshot().health()).into_response()
}

async fn config(State(handle): State<Shared>) -> Response {
    Json(handle.snapshot().config().clone()).into_response()
}

async fn fallback() -> ApiError {
    ApiError(ServiceError::new(ErrorCode::NotFound, "no such endpoint"))
}

/// The API routes, plus static assets from `static_dir` at `/` when given.
pub fn router(handle: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/resolve", post(resolve))
        .route("/api/search", post(search))
        .route("/api/doc/{name}", get(doc))
        .route("/api/examples/{name}", get(examples))
        .route("/api/health", get(health))
        .route("/api/config", get(config))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(handle);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(fallback),
    }
}
