//! HTTP/JSON front end of a [`Campaign`].
//!
//! Errors are returned as `{"code", "message", "detail"}` with the
//! library's error code.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mqmkit::campaign::{Campaign, Submission};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub detail: serde_json::Value,
}

pub struct ErrorResponse(StatusCode, ApiError);

impl From<mqmkit::Error> for ErrorResponse {
    fn from(e: mqmkit::Error) -> Self {
        let code = e.code();
        let status = match code {
            "E_UNKNOWN_ANNOTATOR" | "E_UNKNOWN_TASK" => StatusCode::NOT_FOUND,
            "E_WRONG_ANNOTATOR" => StatusCode::FORBIDDEN,
            "E_VALIDATION" => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let detail = match &e {
            mqmkit::Error::Validation { detail } => serde_json::Value::String(detail.clone()),
            _ => serde_json::Value::Null,
        };
        ErrorResponse(
            status,
            ApiError {
                code: code.to_string(),
                message: e.to_string(),
                detail,
            },
        )
    }
}

impl From<JsonRejection> for ErrorResponse {
    fn from(e: JsonRejection) -> Self {
        ErrorResponse(
            StatusCode::BAD_REQUEST,
            ApiError {
                code: "E_BAD_REQUEST".into(),
                message: "malformed request body".into(),
                detail: serde_json::Value::String(e.body_text()),
            },
        )
    }
}

impl IntoResponse for ErrorResponse {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ErrorResponse>;

#[derive(Deserialize)]
struct NextQuery {
    annotator: String,
}

#[derive(Deserialize)]
struct ContextQuery {
    task: Option<String>,
}

#[derive(Serialize)]
struct NextResponse {
    task: Option<mqmkit::campaign::TaskView>,
}

#[derive(Serialize)]
struct ExportResponse {
    mqm_annotations: usize,
    rr_judgments: usize,
}

async fn next_task(State(c): State<Arc<Campaign>>, Query(q): Query<NextQuery>) -> ApiResult<NextResponse> {
    Ok(Json(NextResponse {
        task: c.next_task(&q.annotator)?,
    }))
}

async fn submit(
    State(c): State<Arc<Campaign>>,
    body: Result<Json<Submission>, JsonRejection>,
) -> ApiResult<mqmkit::campaign::Ack> {
    let Json(submission) = body?;
    let ack = tokio::task::spawn_blocking(move || c.submit(submission))
        .await
        .expect("submit task panicked")?;
    Ok(Json(ack))
}

async fn progress(State(c): State<Arc<Campaign>>) -> Json<mqmkit::campaign::Progress> {
    Json(c.progress())
}

async fn export(State(c): State<Arc<Campaign>>) -> ApiResult<ExportResponse> {
    let project = tokio::task::spawn_blocking(move || c.export())
        .await
        .expect("export task panicked")?;
    Ok(Json(ExportResponse {
        mqm_annotations: project.mqm.len(),
        rr_judgments: project.rr.len(),
    }))
}

async fn context(
    State(c): State<Arc<Campaign>>,
    Path(doc_id): Path<String>,
    Query(q): Query<ContextQuery>,
) -> ApiResult<mqmkit::campaign::DocumentContext> {
    Ok(Json(c.context(&doc_id, q.task.as_deref())?))
}

pub fn router(campaign: Arc<Campaign>) -> Router {
    Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/submissions", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/export", post(export))
        .route("/api/context/{doc_id}", get(context))
        .with_state(campaign)
}

/// Serves until the process is stopped.
pub async fn serve(campaign: Arc<Campaign>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(campaign)).await
}
