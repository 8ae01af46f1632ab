//! JSON-over-HTTP session service.
//!
//! Routes:
//! - `POST /sessions` `{workbook?, csv?, config?, script?}` → 201 `{id}`
//! - `GET /sessions/{id}/sheet` → workbook-json
//! - `POST /sessions/{id}/instructions` `{text}` → outcome, once the turn ends
//! - `GET /sessions/{id}/transcript?since=seq` → events after `seq`
//! - `GET /health` → `{"status":"ok"}`
//!
//! Instructions for one session run one at a time in arrival order.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use sheetmind_agents::orchestrator::{
    Event, InstructionOutcome, PipelineConfig, SessionState, SessionStore, StoreError,
};
use sheetmind_core::io::{from_json_value, load_csv, to_json_value};
use sheetmind_core::Workbook;
use sheetmind_llm::{ChatBackend, ScriptedBackend};
use tokio::net::TcpListener;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::NotFound(_) | StoreError::InvalidId(_) => StatusCode::NOT_FOUND,
            StoreError::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.code, message = %self.message, "request failed");
        }
        let body = Json(json!({"error": {"code": self.code, "message": self.message}}));
        (self.status, body).into_response()
    }
}

struct Live {
    state: SessionState,
    backend: Arc<dyn ChatBackend>,
}

pub struct AppState {
    store: SessionStore,
    backend: Option<Arc<dyn ChatBackend>>,
    default_config: PipelineConfig,
    live: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Live>>>>,
}

impl AppState {
    /// `backend` serves sessions created without their own script.
    pub fn new(store: SessionStore, backend: Option<Arc<dyn ChatBackend>>, default_config: PipelineConfig) -> Self {
        AppState {
            store,
            backend,
            default_config,
            live: Mutex::new(HashMap::new()),
        }
    }

    /// The live session, reloading it from the store after a restart.
    fn session(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<Live>>, ApiError> {
        if let Some(s) = self.live.lock().expect("session map lock").get(id) {
            return Ok(s.clone());
        }
        let state = self.store.load(id)?;
        let backend = self.backend.clone().ok_or_else(|| {
            ApiError::new(StatusCode::CONFLICT, "no-backend", "session was restored but the server has no backend")
        })?;
        let mut map = self.live.lock().expect("session map lock");
        let entry = map
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(tokio::sync::Mutex::new(Live { state, backend })));
        Ok(entry.clone())
    }

    /// Reads from the live session, or from the last saved copy while a
    /// turn holds the session.
    fn read<T>(&self, id: &str, f: impl Fn(&SessionState) -> T) -> Result<T, ApiError> {
        let live = self.session(id)?;
        let value = match live.try_lock() {
            Ok(guard) => f(&guard.state),
            Err(_) => f(&self.store.load(id)?),
        };
        Ok(value)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    #[serde(default)]
    workbook: Option<Value>,
    #[serde(default)]
    csv: Option<String>,
    #[serde(default)]
    config: Option<PipelineConfig>,
    /// Backend script (YAML) replayed for this session only.
    #[serde(default)]
    script: Option<String>,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(body): Json<CreateSession>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let workbook = match (body.workbook, body.csv) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("give either workbook or csv, not both")),
        (Some(w), None) => from_json_value(w).map_err(|e| ApiError::bad_request(e.to_string()))?,
        (None, Some(c)) => load_csv(&c).map_err(|e| ApiError::bad_request(e.to_string()))?,
        (None, None) => Workbook::new(),
    };
    let backend: Arc<dyn ChatBackend> = match body.script {
        Some(yaml) => Arc::new(ScriptedBackend::from_yaml(&yaml).map_err(|e| ApiError::bad_request(e.to_string()))?),
        None => app.backend.clone().ok_or_else(|| {
            ApiError::bad_request("the server has no backend configured; pass a script with the session")
        })?,
    };
    let config = body.config.unwrap_or_else(|| app.default_config.clone());
    let state = app.store.create(workbook, config)?;
    let id = state.id.clone();
    app.live
        .lock()
        .expect("session map lock")
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(Live { state, backend })));
    tracing::info!(%id, "session created");
    Ok((StatusCode::CREATED, Json(json!({"id": id}))))
}

async fn get_sheet(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    app.read(&id, |s| to_json_value(&s.workbook)).map(Json)
}

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

async fn get_transcript(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<Since>,
) -> Result<Json<Vec<Event>>, ApiError> {
    app.read(&id, |s| s.transcript.since(q.since).to_vec()).map(Json)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostInstruction {
    text: String,
}

async fn post_instruction(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<PostInstruction>,
) -> Result<Json<InstructionOutcome>, ApiError> {
    if body.text.trim().is_empty() {
        return Err(ApiError::bad_request("instruction text is empty"));
    }
    let live = app.session(&id)?;
    // Tokio's mutex is fair, so queued turns run in arrival order.
    let mut guard = live.lock_owned().await;
    let app = app.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        let Live { state, backend } = &mut *guard;
        let outcome = state.run_instruction(backend.as_ref(), &body.text);
        app.store.save(state).map(|()| outcome)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(outcome))
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/sheet", get(get_sheet))
        .route("/sessions/{id}/instructions", post(post_instruction))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .with_state(app)
}

/// Serves until `shutdown` resolves, then lets in-flight requests finish.
pub async fn serve_on(
    listener: TcpListener,
    app: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let addr = listener.local_addr()?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(app)).with_graceful_shutdown(shutdown).await
}

pub async fn serve(addr: SocketAddr, app: Arc<AppState>) -> anyhow::Result<()> {
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {addr}: {e}"))?;
    serve_on(listener, app, shutdown_signal()).await?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down after in-flight requests");
}
