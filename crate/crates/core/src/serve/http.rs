use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{Engine, ServeError};
use crate::ingest::Document;

impl IntoResponse for ServeError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServeError::NotFound { .. } => StatusCode::NOT_FOUND,
            ServeError::Invalid(_) => StatusCode::BAD_REQUEST,
            ServeError::Gateway { retryable: true, .. } => StatusCode::SERVICE_UNAVAILABLE,
            ServeError::Gateway { .. } => StatusCode::BAD_GATEWAY,
            ServeError::Retrieval(_) | ServeError::Persist { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string(), "retryable": self.is_retryable() }))).into_response()
    }
}

type Shared = State<Arc<Engine>>;

/// Run blocking engine work (encoding, gateway calls) off the async runtime.
async fn blocking<T, F>(f: F) -> Result<T, ServeError>
where
    F: FnOnce() -> Result<T, ServeError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ServeError::Retrieval(format!("worker panicked: {e}")))?
}

/// Body: one canonical document line.
async fn add_document(State(engine): Shared, body: String) -> Result<Json<serde_json::Value>, ServeError> {
    let lines: Vec<&str> = body.lines().filter(|l| !l.trim().is_empty()).collect();
    let [line] = lines.as_slice() else {
        return Err(ServeError::Invalid(format!("expected one canonical document line, got {}", lines.len())));
    };
    let doc = Document::from_canonical_line(line).map_err(|e| ServeError::Invalid(e.to_string()))?;
    let summary = blocking(move || engine.add_document(doc)).await?;
    Ok(Json(json!({ "doc_id": summary.doc_id, "pages": summary.pages })))
}

#[derive(Deserialize)]
struct NewSession {
    doc_id: String,
    budget: Option<usize>,
}

async fn create_session(State(engine): Shared, Json(req): Json<NewSession>) -> Result<Json<serde_json::Value>, ServeError> {
    let s = engine.create_session(&req.doc_id, req.budget)?;
    Ok(Json(json!({ "session_id": s.session_id, "doc_id": s.doc_id, "budget": s.budget })))
}

async fn get_session(State(engine): Shared, Path(id): Path<String>) -> Result<Json<super::Session>, ServeError> {
    Ok(Json(engine.session(&id)?))
}

#[derive(Deserialize)]
struct Ask {
    question: String,
}

async fn ask(State(engine): Shared, Path(id): Path<String>, Json(req): Json<Ask>) -> Result<Json<serde_json::Value>, ServeError> {
    let turn = blocking(move || engine.ask(&id, &req.question)).await?;
    Ok(Json(json!({
        "answer": turn.answer,
        "cited_pages": turn.cited_pages,
        "selected_pages": turn.selected_pages,
        "scores": turn.scores,
    })))
}

async fn page(State(engine): Shared, Path((id, n)): Path<(String, u32)>) -> Result<Json<serde_json::Value>, ServeError> {
    let doc = engine.document(&id)?;
    let page = doc.page(n).ok_or_else(|| ServeError::NotFound { kind: "page", id: format!("{id}/{n}") })?;
    Ok(Json(json!({
        "doc_id": doc.doc_id,
        "page_no": page.page_no,
        "page_count": doc.page_count(),
        "width_px": page.width_px,
        "height_px": page.height_px,
        "text": page.text(),
        "paragraphs": page.paragraphs,
    })))
}

async fn healthz(State(engine): Shared) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "documents": engine.document_count(), "sessions": engine.session_count() }))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/documents", post(add_document))
        .route("/documents/{id}/pages/{n}", get(page))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/ask", post(ask))
        .route("/healthz", get(healthz))
        .with_state(engine)
}

/// Bind `addr` and serve until the process is stopped.
pub async fn listen(engine: Arc<Engine>, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} documents on http://{}", engine.document_count(), listener.local_addr()?);
    axum::serve(listener, router(engine)).await
}
