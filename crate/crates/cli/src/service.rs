//! HTTP session service. Sessions live in memory; each accepts one turn at
//! a time and can optionally be mirrored to disk for replay.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock as StdRwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;
use tripcsp::plan::{plan_to_json, serialize_plan};
use tripcsp::{Orchestrator, OrchestratorConfig, Patch, Sandbox, SessionState, StructuredQuery, TurnInput};
use uuid::Uuid;

use crate::session::{constraint_dump, render_turn, SessionRecord, TurnResponse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub id: Uuid,
    pub created_at: u64,
    pub config: OrchestratorConfig,
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub query: Option<StructuredQuery>,
    #[serde(default)]
    pub config: Option<OrchestratorConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TurnBody {
    Query { query: StructuredQuery },
    Patches { patches: Vec<Patch> },
}

impl From<TurnBody> for TurnInput {
    fn from(b: TurnBody) -> Self {
        match b {
            TurnBody::Query { query } => TurnInput::Query(query),
            TurnBody::Patches { patches } => TurnInput::Patches(patches),
        }
    }
}

struct Inner {
    orch: Orchestrator,
    state: SessionState,
    inputs: Vec<TurnInput>,
}

/// What readers see: refreshed at the end of every turn, so reads never
/// wait on a running one.
#[derive(Default)]
struct View {
    plan: Option<String>,
    trace: String,
    constraints: String,
}

struct Slot {
    handle: SessionHandle,
    busy: AtomicBool,
    inner: Mutex<Inner>,
    view: StdRwLock<View>,
}

fn poisoned() -> ApiError {
    ApiError::Internal("session lock poisoned".into())
}

/// Exclusive right to run a turn on one session. Dropping it frees the
/// session, however the turn ended.
pub struct TurnGuard(Arc<Slot>);

impl Drop for TurnGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

#[derive(Clone)]
pub struct AppState {
    sandbox: Arc<Sandbox>,
    sessions: Arc<RwLock<HashMap<Uuid, Arc<Slot>>>>,
    persist: Option<PathBuf>,
}

impl AppState {
    pub fn new(sandbox: Arc<Sandbox>, persist: Option<PathBuf>) -> Self {
        Self {
            sandbox,
            sessions: Arc::default(),
            persist,
        }
    }

    async fn slot(&self, id: Uuid) -> Result<Arc<Slot>, ApiError> {
        self.sessions.read().await.get(&id).cloned().ok_or(ApiError::NotFound)
    }

    /// Claims a session for one turn; fails while another turn holds it.
    pub async fn reserve(&self, id: Uuid) -> Result<TurnGuard, ApiError> {
        let slot = self.slot(id).await?;
        if slot.busy.swap(true, Ordering::AcqRel) {
            return Err(ApiError::Busy);
        }
        Ok(TurnGuard(slot))
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound,
    NoPlan,
    Busy,
    Invalid(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, msg) = match self {
            ApiError::NotFound => (StatusCode::NOT_FOUND, "unknown session".to_string()),
            ApiError::NoPlan => (StatusCode::NOT_FOUND, "no plan yet".to_string()),
            ApiError::Busy => (StatusCode::CONFLICT, "a turn is already in progress".to_string()),
            ApiError::Invalid(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (code, Json(ErrorBody { error: msg })).into_response()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(remove))
        .route("/sessions/{id}/turns", post(turn))
        .route("/sessions/{id}/plan", get(plan))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/constraints", get(constraints))
        .with_state(state)
}

async fn create(State(app): State<AppState>, Json(body): Json<CreateSession>) -> Result<Response, ApiError> {
    let config = body.config.unwrap_or_default();
    let mut state = SessionState::new();
    if let Some(q) = body.query {
        q.validate().map_err(|e| ApiError::Invalid(e.to_string()))?;
        state.query = Some(q);
    }
    let handle = SessionHandle {
        id: Uuid::new_v4(),
        created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config,
    };
    let view = View {
        constraints: constraint_dump(&state),
        ..View::default()
    };
    let slot = Slot {
        handle: handle.clone(),
        busy: AtomicBool::new(false),
        view: StdRwLock::new(view),
        inner: Mutex::new(Inner {
            orch: Orchestrator::new(app.sandbox.clone(), config),
            state,
            inputs: Vec::new(),
        }),
    };
    app.sessions.write().await.insert(handle.id, Arc::new(slot));
    tracing::info!(id = %handle.id, "session created");
    Ok((StatusCode::CREATED, Json(handle)).into_response())
}

async fn remove(State(app): State<AppState>, Path(id): Path<Uuid>) -> Result<StatusCode, ApiError> {
    app.sessions.write().await.remove(&id).ok_or(ApiError::NotFound)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn turn(
    State(app): State<AppState>,
    Path(id): Path<Uuid>,
    Json(body): Json<TurnBody>,
) -> Result<Json<TurnResponse>, ApiError> {
    let guard = app.reserve(id).await?;
    let input: TurnInput = body.into();
    let persist = app.persist.clone();
    tokio::task::spawn_blocking(move || {
        let slot = &guard.0;
        let mut inner = slot.inner.lock().map_err(|_| poisoned())?;
        let Inner { orch, state, inputs } = &mut *inner;
        let r = orch.step(state, &input).map_err(|e| ApiError::Invalid(e.to_string()))?;
        inputs.push(input);
        let plan = serialize_plan(&r.assignment).map_err(|e| ApiError::Internal(e.to_string()))?;
        *slot.view.write().map_err(|_| poisoned())? = View {
            plan: Some(plan_to_json(&plan)),
            trace: state.trace.iter().map(|l| format!("{l}\n")).collect(),
            constraints: constraint_dump(state),
        };
        if let Some(dir) = persist {
            SessionRecord::capture(orch.config, inputs, state)
                .save(&dir.join(format!("{}.json", slot.handle.id)))
                .map_err(|e| ApiError::Internal(e.to_string()))?;
        }
        render_turn(&r, state).map(Json).map_err(|e| ApiError::Internal(e.to_string()))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
}

fn read<T>(slot: &Slot, f: impl FnOnce(&View) -> Result<T, ApiError>) -> Result<T, ApiError> {
    f(&*slot.view.read().map_err(|_| poisoned())?)
}

async fn plan(State(app): State<AppState>, Path(id): Path<Uuid>) -> Result<Response, ApiError> {
    let slot = app.slot(id).await?;
    let body = read(&slot, |v| v.plan.clone().ok_or(ApiError::NoPlan))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn trace(State(app): State<AppState>, Path(id): Path<Uuid>) -> Result<String, ApiError> {
    let slot = app.slot(id).await?;
    read(&slot, |v| Ok(v.trace.clone()))
}

async fn constraints(State(app): State<AppState>, Path(id): Path<Uuid>) -> Result<String, ApiError> {
    let slot = app.slot(id).await?;
    read(&slot, |v| Ok(v.constraints.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turn_body_picks_its_shape() {
        let b: TurnBody = serde_json::from_str(r#"{"patches":[{"op":"remove","field":"cuisines"}]}"#).unwrap();
        assert!(matches!(TurnInput::from(b), TurnInput::Patches(p) if p.len() == 1));
        assert!(serde_json::from_str::<TurnBody>(r#"{"plan":[]}"#).is_err());
    }

    #[test]
    fn errors_map_to_status_codes() {
        let code = |e: ApiError| e.into_response().status();
        assert_eq!(code(ApiError::NotFound), StatusCode::NOT_FOUND);
        assert_eq!(code(ApiError::NoPlan), StatusCode::NOT_FOUND);
        assert_eq!(code(ApiError::Busy), StatusCode::CONFLICT);
        assert_eq!(code(ApiError::Invalid("x".into())), StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(code(ApiError::Internal("x".into())), StatusCode::INTERNAL_SERVER_ERROR);
    }
}
