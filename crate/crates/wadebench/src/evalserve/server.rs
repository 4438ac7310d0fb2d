//! HTTP front of the evaluation sessions.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wadebench_core::seed;

use super::session::{EvalSession, SessionError};

pub struct AppState {
    seed: u64,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<u64, Arc<Mutex<EvalSession>>>>,
    transcript: Option<Mutex<std::fs::File>>,
}

impl AppState {
    pub fn new(seed: u64) -> Self {
        AppState { seed, next_id: AtomicU64::new(0), sessions: Mutex::new(HashMap::new()), transcript: None }
    }

    /// Appends every accepted answer as a JSON line to `path`.
    pub fn with_transcript(seed: u64, path: PathBuf) -> crate::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| crate::Error::io(path, e))?;
        Ok(AppState { transcript: Some(Mutex::new(file)), ..AppState::new(seed) })
    }

    /// Seed of the `k`-th session created by a server started with `seed`.
    pub fn session_seed(seed: u64, k: u64) -> u64 {
        seed::derive(seed, &[k])
    }
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::Arity { .. } => StatusCode::BAD_REQUEST,
            SessionError::Finished | SessionError::NoScore => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": { "code": self.code, "message": self.message } }))).into_response()
    }
}

#[derive(Serialize)]
struct Created {
    session_id: String,
    sequence: Vec<String>,
    hidden: Vec<usize>,
}

#[derive(Deserialize)]
struct AnswerBody {
    answers: Vec<String>,
}

#[derive(Serialize)]
struct Answered {
    correct: bool,
    revealed: Vec<String>,
    streak: u32,
    next_sequence: Option<Vec<String>>,
    next_hidden: Option<Vec<usize>>,
    task_switched: bool,
}

#[derive(Serialize)]
struct Scored {
    curve: Vec<(u64, f64)>,
    wade: f64,
}

type Shared = Arc<AppState>;

fn lookup(state: &AppState, id: &str) -> Result<Arc<Mutex<EvalSession>>, ApiError> {
    let missing = || ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"));
    let key: u64 = id.parse().map_err(|_| missing())?;
    state.sessions.lock().expect("session table").get(&key).cloned().ok_or_else(missing)
}

async fn create(State(state): State<Shared>) -> Json<Created> {
    let k = state.next_id.fetch_add(1, Ordering::Relaxed);
    let session = EvalSession::new(AppState::session_seed(state.seed, k));
    let q = session.question();
    state.sessions.lock().expect("session table").insert(k, Arc::new(Mutex::new(session)));
    Json(Created { session_id: k.to_string(), sequence: q.sequence, hidden: q.hidden })
}

async fn answer(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<AnswerBody>, JsonRejection>,
) -> Result<Json<Answered>, ApiError> {
    let session = lookup(&state, &id)?;
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text()))?;
    let verdict = session.lock().expect("session").submit(&body.answers)?;
    if let Some(log) = &state.transcript {
        let line = json!({ "session": id, "answers": body.answers });
        let _ = writeln!(log.lock().expect("transcript"), "{line}");
    }
    let (next_sequence, next_hidden) = match verdict.next {
        Some(q) => (Some(q.sequence), Some(q.hidden)),
        None => (None, None),
    };
    Ok(Json(Answered {
        correct: verdict.correct,
        revealed: verdict.revealed,
        streak: verdict.streak,
        next_sequence,
        next_hidden,
        task_switched: verdict.task_switched,
    }))
}

async fn score(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<Scored>, ApiError> {
    let session = lookup(&state, &id)?;
    let s = session.lock().expect("session").score()?;
    Ok(Json(Scored { curve: s.curve, wade: s.wade }))
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}/answer", post(answer))
        .route("/session/{id}/score", get(score))
        .route("/health", get(health))
        .with_state(Arc::new(state))
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| crate::Error::usage(format!("cannot bind {addr}: {e}")))?;
    axum::serve(listener, router(state)).await.map_err(|e| crate::Error::usage(format!("server stopped: {e}")))
}
