#![allow(clippy::result_large_err)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::multipart::{Multipart, MultipartRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use forge_llm::GatewayError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::orchestrator::{gateway_code, Workbench, WorkbenchError};
use crate::session::{SessionConfig, TurnRecord, TurnStatus};

const MAX_BODY: usize = 32 * 1024 * 1024;

/// Error body returned by every failing endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), code: code.into(), message: message.into(), details: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn gateway_error(e: &GatewayError) -> ApiError {
    let status = match e {
        GatewayError::UnsupportedMedia(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
        GatewayError::Precondition(_) => StatusCode::BAD_REQUEST,
        GatewayError::Timeout { .. } => StatusCode::GATEWAY_TIMEOUT,
        _ => StatusCode::BAD_GATEWAY,
    };
    ApiError::new(status, &gateway_code(e), e.to_string())
}

impl From<WorkbenchError> for ApiError {
    fn from(e: WorkbenchError) -> Self {
        let message = e.to_string();
        match &e {
            WorkbenchError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "session_not_found", message),
            WorkbenchError::InvalidInput(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_input", message),
            WorkbenchError::NoTurn(_) => ApiError::new(StatusCode::NOT_FOUND, "turn_not_found", message),
            WorkbenchError::NoDiagram => ApiError::new(StatusCode::NOT_FOUND, "no_diagram", message),
            WorkbenchError::Gateway(g) => gateway_error(g),
            WorkbenchError::Store(_) => {
                tracing::error!(error = %message, "persistence failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "persistence_error", message)
            }
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    wb: Arc<Workbench>,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
    /// Static web client served under `/ui`.
    pub ui_dir: Option<PathBuf>,
}

pub fn router(wb: Arc<Workbench>, opts: &ServiceOptions) -> Router {
    let origin = match opts.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(v)) => AllowOrigin::exact(v),
        _ => AllowOrigin::from(Any),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any);
    let mut app = Router::new()
        .route("/api/health", get(health))
        .route("/api/tools", get(tools))
        .route("/api/sessions", post(create_session).get(list_sessions))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/audio", post(audio))
        .route("/api/sessions/{id}/prompt", post(prompt))
        .route("/api/sessions/{id}/model", axum::routing::put(edit_model))
        .route("/api/sessions/{id}/diagram", get(diagram))
        .route("/api/sessions/{id}/diagnostics", get(diagnostics))
        .route("/api/sessions/{id}/progress", get(progress));
    if let Some(dir) = &opts.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .layer(cors)
        .with_state(AppState { wb })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}

async fn health() -> Json<Value> {
    Json(json!({ "ok": true }))
}

async fn tools(State(s): State<AppState>) -> Json<Value> {
    Json(s.wb.tools().clone())
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", format!("invalid request body: {e}")))
}

#[derive(Deserialize, Default)]
struct CreateRequest {
    #[serde(default)]
    config: Option<SessionConfig>,
}

async fn create_session(State(s): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: CreateRequest = if body.iter().all(u8::is_ascii_whitespace) { CreateRequest::default() } else { json_body(&body)? };
    let session = s.wb.create_session(req.config.unwrap_or_default())?;
    Ok((StatusCode::CREATED, Json(json!({ "id": session.id }))))
}

async fn list_sessions(State(s): State<AppState>) -> ApiResult<Json<Value>> {
    let ids = s.wb.store().list().map_err(WorkbenchError::Store)?;
    Ok(Json(json!(ids)))
}

fn json_bytes(value: &impl Serialize) -> Response {
    let body = serde_json::to_vec(value).expect("response serializes");
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn get_session(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(json_bytes(&s.wb.session(&id)?))
}

fn turn_response(record: TurnRecord) -> ApiResult<Json<TurnRecord>> {
    if record.status == TurnStatus::Failed {
        let (code, message) = match &record.error {
            Some(e) => (e.code.clone(), e.message.clone()),
            None => ("turn_failed".into(), "turn failed".into()),
        };
        let details = serde_json::to_value(&record).expect("record serializes");
        return Err(ApiError::new(StatusCode::BAD_GATEWAY, &code, message).with_details(details));
    }
    Ok(Json(record))
}

#[derive(Deserialize)]
struct TextRequest {
    text: String,
}

async fn prompt(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<TurnRecord>> {
    let req: TextRequest = json_body(&body)?;
    turn_response(s.wb.submit_prompt(&id, &req.text).await?)
}

async fn edit_model(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<TurnRecord>> {
    let req: TextRequest = json_body(&body)?;
    turn_response(s.wb.edit_model(&id, &req.text).await?)
}

async fn audio(
    State(s): State<AppState>,
    Path(id): Path<String>,
    form: Result<Multipart, MultipartRejection>,
) -> ApiResult<Response> {
    let mut form = form.map_err(|e| ApiError::bad_request(format!("expected multipart form data: {e}")))?;
    let (mut file, mut language) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::bad_request(e.to_string()))? {
        match field.name() {
            Some("file") => {
                let media = field.content_type().unwrap_or("application/octet-stream").to_string();
                let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
                file = Some((bytes, media));
            }
            Some("language") => {
                language = Some(field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?);
            }
            _ => {}
        }
    }
    let (bytes, media) = file.ok_or_else(|| ApiError::bad_request("missing `file` field"))?;
    let outcome = s.wb.submit_audio(&id, &bytes, &media, language.as_deref().filter(|l| !l.is_empty())).await?;
    if let Some(turn) = &outcome.turn {
        turn_response(turn.clone()).map(|_| ())?;
    }
    Ok(json_bytes(&outcome))
}

fn turn_param(q: &HashMap<String, String>) -> ApiResult<Option<usize>> {
    match q.get("turn") {
        None => Ok(None),
        Some(t) => t
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| ApiError::bad_request(format!("turn must be a positive integer, got `{t}`"))),
    }
}

async fn diagram(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let turn = turn_param(&q)?;
    let (json, content_type) = match q.get("format").map(String::as_str) {
        None | Some("svg") => (false, "image/svg+xml"),
        Some("json") => (true, "application/json"),
        Some(other) => return Err(ApiError::bad_request(format!("unknown format `{other}`; expected svg or json"))),
    };
    let bytes = s.wb.diagram(&id, turn, json)?;
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

async fn diagnostics(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let turn = turn_param(&q)?;
    Ok(json_bytes(&s.wb.diagnostics(&id, turn)?))
}

async fn progress(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(json_bytes(&s.wb.progress(&id)?))
}
