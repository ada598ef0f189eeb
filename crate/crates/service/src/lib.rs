//! HTTP/JSON sessions over one problem each: create, inspect, apply a
//! theorem, undo, and ask for a search suggestion.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | body: a problem record, or `{"problem": id}` from the problem directory |
//! | GET | `/sessions/{id}` | full state |
//! | POST | `/sessions/{id}/steps` | `{"theorem": "...", "binding": ["AB", ...]?}` |
//! | POST | `/sessions/{id}/undo` | |
//! | GET | `/sessions/{id}/hypertree` | |
//! | GET | `/sessions/{id}/theorems` | |
//! | POST | `/sessions/{id}/search` | `{"method", "strategy", "budget"}`, no mutation |
//! | GET | `/problems` | ids in the problem directory |

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use plangeo_core::harness::{load_dir, ProblemRecord};
use plangeo_core::par::Exec;
use plangeo_core::point::points;
use plangeo_core::problem::{export_hypertree, Goal, HyperEdge, HyperNode, Hypertree, Problem};
use plangeo_core::search::{applicable, interactive_apply, search, Method, SearchConfig, SearchResult, Strategy, TheoremCall};
use plangeo_core::Kb;
use serde::{Deserialize, Serialize};

/// One interactive problem.
pub struct Session {
    problem: Problem,
    log: Vec<String>,
    /// Store lengths before each applied step.
    checkpoints: Vec<usize>,
}

impl Session {
    fn new(problem: Problem) -> Session {
        Session { problem, log: Vec::new(), checkpoints: Vec::new() }
    }

    fn document(&self, id: u64) -> SessionDoc {
        SessionDoc {
            session: id,
            problem_id: self.problem.id.clone(),
            hypertree: export_hypertree(&self.problem.store, &self.problem.goal),
            log: self.log.clone(),
            theorems: applicable_names(&self.problem),
        }
    }
}

fn applicable_names(p: &Problem) -> Vec<String> {
    applicable(&p.store).iter().map(|c| c.to_string()).collect()
}

#[derive(Clone)]
pub struct AppState {
    kb: Arc<Kb>,
    problem_dir: Option<PathBuf>,
    sessions: Arc<Mutex<HashMap<u64, Arc<RwLock<Session>>>>>,
    next_id: Arc<AtomicU64>,
}

impl AppState {
    pub fn new(kb: Arc<Kb>) -> AppState {
        AppState { kb, problem_dir: None, sessions: Arc::default(), next_id: Arc::new(AtomicU64::new(1)) }
    }

    /// Problems that `POST /sessions` may reference by id.
    pub fn with_problem_dir(mut self, dir: PathBuf) -> AppState {
        self.problem_dir = Some(dir);
        self
    }

    fn session(&self, id: u64) -> Result<Arc<RwLock<Session>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    statement: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> ApiError {
        ApiError { status, body: ErrorBody { error: error.into(), statement: None } }
    }

    fn busy() -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "session is being modified")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionDoc {
    pub session: u64,
    pub problem_id: String,
    pub hypertree: Hypertree,
    pub log: Vec<String>,
    pub theorems: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StepDoc {
    pub theorem: String,
    pub bindings: usize,
    pub new_conditions: Vec<HyperNode>,
    pub edges: Vec<HyperEdge>,
    pub goal: plangeo_core::problem::GoalDoc,
    pub diagnostics: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CreateRequest {
    Named { problem: String },
    Record(Box<ProblemRecord>),
}

#[derive(Deserialize)]
pub struct StepRequest {
    pub theorem: String,
    #[serde(default)]
    pub binding: Option<Vec<String>>,
}

#[derive(Deserialize)]
pub struct SearchRequest {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    /// Seconds.
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub beam: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> Method {
    Method::Forward
}

fn default_strategy() -> Strategy {
    Strategy::Bfs
}

fn default_budget() -> f64 {
    10.0
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/problems", get(list_problems))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/steps", post(apply_step))
        .route("/sessions/{id}/undo", post(undo_step))
        .route("/sessions/{id}/hypertree", get(get_hypertree))
        .route("/sessions/{id}/theorems", get(get_theorems))
        .route("/sessions/{id}/search", post(search_session))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

fn problem_records(state: &AppState) -> Result<Vec<ProblemRecord>, ApiError> {
    let Some(dir) = &state.problem_dir else { return Ok(vec![]) };
    let (records, _) = load_dir(dir).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

async fn list_problems(State(state): State<AppState>) -> Result<Json<Vec<String>>, ApiError> {
    Ok(Json(problem_records(&state)?.into_iter().map(|r| r.problem_id).collect()))
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<SessionDoc>), ApiError> {
    let record = match req {
        CreateRequest::Record(r) => *r,
        CreateRequest::Named { problem } => problem_records(&state)?
            .into_iter()
            .find(|r| r.problem_id == problem)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no problem {problem}")))?,
    };
    let kb = state.kb.clone();
    let problem = blocking(move || record.load(kb, Exec::default())).await?.map_err(|e| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        body: ErrorBody { error: e.message.clone(), statement: Some(e.statement.clone()) },
    })?;
    let id = state.next_id.fetch_add(1, Ordering::SeqCst);
    let session = Session::new(problem);
    let doc = session.document(id);
    state.sessions.lock().expect("session table").insert(id, Arc::new(RwLock::new(session)));
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<SessionDoc>, ApiError> {
    let s = state.session(id)?;
    let doc = s.read().expect("session").document(id);
    Ok(Json(doc))
}

async fn get_hypertree(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<Hypertree>, ApiError> {
    let s = state.session(id)?;
    let guard = s.read().expect("session");
    Ok(Json(export_hypertree(&guard.problem.store, &guard.problem.goal)))
}

#[derive(Serialize)]
struct TheoremList {
    theorems: Vec<String>,
}

async fn get_theorems(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<TheoremList>, ApiError> {
    let s = state.session(id)?;
    let theorems = applicable_names(&s.read().expect("session").problem);
    Ok(Json(TheoremList { theorems }))
}

fn parse_call(req: &StepRequest) -> Result<TheoremCall, ApiError> {
    let unprocessable = |e: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e);
    let mut call = TheoremCall::parse(&req.theorem).map_err(|e| unprocessable(e.to_string()))?;
    if let Some(groups) = &req.binding {
        let parsed: Option<Vec<_>> = groups.iter().map(|g| points(g).filter(|p| !p.is_empty())).collect();
        call.binding = Some(parsed.ok_or_else(|| unprocessable(format!("malformed binding {groups:?}")))?);
    }
    Ok(call)
}

async fn apply_step(
    State(state): State<AppState>,
    Path(id): Path<u64>,
    Json(req): Json<StepRequest>,
) -> Result<Json<StepDoc>, ApiError> {
    let s = state.session(id)?;
    let call = parse_call(&req)?;
    blocking(move || {
        let mut guard = s.try_write().map_err(|_| ApiError::busy())?;
        let session = &mut *guard;
        let before = session.problem.store.len();
        let p = &mut session.problem;
        let report = interactive_apply(&mut p.store, &mut p.goal, &call, Exec::default())
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        session.checkpoints.push(before);
        session.log.push(call.to_string());
        let tree = export_hypertree(&session.problem.store, &session.problem.goal);
        Ok(Json(StepDoc {
            theorem: call.to_string(),
            bindings: report.bindings,
            new_conditions: tree.nodes[before..].to_vec(),
            edges: tree.edges.into_iter().filter(|e| e.conclusions.iter().any(|&c| c >= before)).collect(),
            goal: tree.goal,
            diagnostics: report.diagnostics,
        }))
    })
    .await?
}

async fn undo_step(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<SessionDoc>, ApiError> {
    let s = state.session(id)?;
    let mut guard = s.try_write().map_err(|_| ApiError::busy())?;
    let session = &mut *guard;
    let Some(len) = session.checkpoints.pop() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "nothing to undo"));
    };
    session.log.pop();
    let p = &mut session.problem;
    p.store.truncate(len);
    p.goal = Goal::new(p.goal.kind.clone());
    p.goal.update(&p.store);
    Ok(Json(session.document(id)))
}

async fn search_session(
    State(state): State<AppState>,
    Path(id): Path<u64>,
    Json(req): Json<SearchRequest>,
) -> Result<Json<SearchResult>, ApiError> {
    let s = state.session(id)?;
    let problem = s.read().expect("session").problem.clone();
    let defaults = SearchConfig::default();
    let timeout = Duration::try_from_secs_f64(req.budget.max(0.0))
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let config = SearchConfig {
        method: req.method,
        strategy: req.strategy,
        max_depth: req.depth.unwrap_or(defaults.max_depth).max(1),
        beam_size: req.beam.unwrap_or(defaults.beam_size).max(1),
        timeout,
        seed: req.seed,
        exec: Exec::default(),
    };
    let result = blocking(move || search(&problem, &config)).await?;
    Ok(Json(result))
}
