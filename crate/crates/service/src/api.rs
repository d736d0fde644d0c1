//! HTTP routes.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create a draft session |
//! | GET | `/sessions/{id}` | session state and per-matrix feedback |
//! | PUT | `/sessions/{id}/experts/{expert}/matrices/{matrix}/cells` | set one judgment |
//! | POST | `/sessions/{id}/finalize` | attach measurements and score |
//! | GET | `/sessions/{id}/results` | results of a finalized session |
//!
//! Matrices are named `criteria` or by criterion id; cell indices are
//! zero-based.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use crate::session::{
    CellEdit, CreateSession, ElicitationSession, FinalizeRequest, MatrixFeedback, ServiceError,
};
use crate::store::Store;

pub type AppState = Arc<Store>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ServiceError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ServiceError::Conflict(m) => (StatusCode::CONFLICT, json!({ "error": m })),
            ServiceError::Unprocessable {
                message,
                diagnostics,
                missing_cells,
            } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": message, "diagnostics": diagnostics, "missing_cells": missing_cells }),
            ),
            ServiceError::Internal(m) => {
                log::error!("{m}");
                (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m }))
            }
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub session: Arc<ElicitationSession>,
    pub feedback: Vec<MatrixFeedback>,
}

#[derive(Debug, Serialize)]
pub struct CellResponse {
    pub version: u64,
    #[serde(flatten)]
    pub feedback: MatrixFeedback,
}

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route(
            "/sessions/{id}/experts/{expert}/matrices/{matrix}/cells",
            put(put_cell),
        )
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/results", get(results))
        .with_state(store)
}

async fn blocking<R: Send + 'static>(
    f: impl FnOnce() -> Result<R, ServiceError> + Send + 'static,
) -> Result<R, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn view(session: Arc<ElicitationSession>) -> Result<SessionView, ServiceError> {
    let feedback = session.all_feedback()?;
    Ok(SessionView { session, feedback })
}

fn results_response(body: Arc<String>) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        body.as_str().to_owned(),
    )
        .into_response()
}

async fn create_session(
    State(store): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let v = blocking(move || {
        let id = uuid::Uuid::new_v4().to_string();
        let session = ElicitationSession::create(id, req)?;
        log::info!("created session {}", session.session_id);
        view(store.insert(session)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(v)))
}

async fn get_session(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(blocking(move || view(store.get(&id)?)).await?))
}

async fn put_cell(
    State(store): State<AppState>,
    Path((id, expert, matrix)): Path<(String, String, String)>,
    Json(edit): Json<CellEdit>,
) -> Result<Json<CellResponse>, ServiceError> {
    let r = blocking(move || {
        let (feedback, session) = store.update(&id, |s| s.put_cell(&expert, &matrix, &edit))?;
        Ok(CellResponse {
            version: session.version,
            feedback,
        })
    })
    .await?;
    Ok(Json(r))
}

async fn finalize(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<FinalizeRequest>,
) -> Result<Response, ServiceError> {
    let body = blocking(move || {
        let out = store.finalize(&id, |s| s.finalize(req))?;
        log::info!("finalized session {id}");
        Ok(out)
    })
    .await?;
    Ok(results_response(body))
}

async fn results(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    match store.results(&id)? {
        Some(body) => Ok(results_response(body)),
        None => Err(ServiceError::NotFound(format!(
            "session '{id}' has not been finalized"
        ))),
    }
}
