#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use sheetmind::service::{router, AppState};
use sheetmind::task::{load_suite, Task};
use sheetmind_agents::orchestrator::{PipelineConfig, SessionStore};
use sheetmind_core::io::to_json_value;
use sheetmind_llm::ChatBackend;
use tower::ServiceExt;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

pub fn golden() -> Vec<Task> {
    load_suite(&golden_dir()).expect("golden suite loads")
}

pub fn golden_task(id: &str) -> Task {
    golden().into_iter().find(|t| t.id() == id).expect("task exists")
}

pub fn app(store: &std::path::Path, backend: Option<Arc<dyn ChatBackend>>) -> (Arc<AppState>, Router) {
    let state = Arc::new(AppState::new(
        SessionStore::open(store).unwrap(),
        backend,
        PipelineConfig::default(),
    ));
    (state.clone(), router(state))
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()))
    };
    (status, value)
}

/// Body for `POST /sessions` replaying the task's own script.
pub fn session_body(task: &Task) -> Value {
    json!({
        "workbook": to_json_value(&task.initial),
        "script": task.script,
        "config": {"test_mode": true},
    })
}
