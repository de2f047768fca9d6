//! HTTP front end: sessions, chat through a parser binding, direct program
//! execution, calendar and transcript views, and remote benchmarking.
//!
//! | method | path | body | reply |
//! |--------|------|------|-------|
//! | POST | `/session` | `{clock_now?, initial_db?}` | `{session_id, clock_now}` |
//! | POST | `/session/{id}/chat` | `{utterance, parser_url?}` | [`TurnReply`] |
//! | POST | `/session/{id}/execute` | `{program}` | [`TurnReply`] |
//! | GET | `/session/{id}/calendar` | | database document |
//! | GET | `/session/{id}/transcript` | | `[{speaker, text}]` |
//! | POST | `/evaluate` | [`EvaluateRequest`] | [`EvalReport`] |
//! | POST | `/parse` | [`ParseRequest`] | [`ParseResponse`] (stub grammar) |
//!
//! Errors are `{"error": {"code", "message"}}`. Each session sits behind its
//! own async mutex held for the whole request, parser call included, so
//! requests to one session run one at a time while sessions proceed in
//! parallel.

mod parser;

use std::collections::HashMap;
use std::io;
use std::net::{SocketAddr, TcpListener as StdTcpListener};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::{oneshot, Mutex};

use crate::db::{diff, Database, DatabaseDocument, DiffEntry};
use crate::eval::{
    load_dataset, run_benchmark, DialogueRecord, EvalReport, OfflinePredictions, PredictionRecord,
    PredictionSource, RunOptions, StubParser,
};
use crate::graph::{run_turn, EvaluationContext, GraphDocument};
use crate::stub::stub_parse;
use crate::value::DateTime;

pub use self::parser::{ParseRequest, ParseResponse, ParserBinding, RemoteParser, RemoteParserError};

/// Session clock used when `POST /session` gives none (a Monday).
pub fn default_clock() -> DateTime {
    DateTime::ymd_hm(2023, 1, 2, 9, 0).expect("valid")
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub binding: ParserBinding,
    pub default_clock: DateTime,
    /// Used for per-request `parser_url` overrides.
    pub timeout: Duration,
    pub max_retries: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            binding: ParserBinding::Stub,
            default_clock: default_clock(),
            timeout: Duration::from_secs(10),
            max_retries: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseErrorDetail {
    pub message: String,
    pub start: usize,
    pub end: usize,
}

/// Reply to chat and execute requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnReply {
    /// Program that was executed; empty when the parser found none.
    pub program: String,
    pub graph: GraphDocument,
    pub response: String,
    pub db_diff: Vec<DiffEntry>,
    pub parse_error: Option<ParseErrorDetail>,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub context: EvaluationContext,
    /// Seconds since the Unix epoch; metadata only, never fed to evaluation.
    pub created_at: u64,
    pub transcript: Vec<TranscriptEntry>,
}

impl Session {
    fn last_agent_utterance(&self) -> Option<String> {
        self.transcript
            .iter()
            .rev()
            .find(|e| e.speaker == "agent")
            .map(|e| e.text.clone())
    }

    fn apply(&mut self, user_text: String, program: String) -> TurnReply {
        let before = self.context.database.snapshot();
        let turn = run_turn(&program, &mut self.context);
        let after = self.context.database.snapshot();
        self.transcript.push(TranscriptEntry {
            speaker: "user".into(),
            text: user_text,
        });
        self.transcript.push(TranscriptEntry {
            speaker: "agent".into(),
            text: turn.outcome.response.clone(),
        });
        TurnReply {
            program,
            graph: turn.outcome.graph.to_document(),
            response: turn.outcome.response,
            db_diff: diff(&before, &after),
            parse_error: turn.parse_error.map(|e| ParseErrorDetail {
                message: e.to_string(),
                start: e.span().start,
                end: e.span().end,
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn session_not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {id}"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
struct CreateSessionRequest {
    #[serde(default)]
    clock_now: Option<DateTime>,
    #[serde(default)]
    initial_db: Option<DatabaseDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSessionReply {
    pub session_id: String,
    pub clock_now: DateTime,
}

#[derive(Debug, Deserialize)]
struct ChatRequest {
    utterance: String,
    #[serde(default)]
    parser_url: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ExecuteRequest {
    program: String,
}

/// Body of `POST /evaluate`. Exactly one of `dataset` and `dataset_path`;
/// predictions come from `predictions`, else `parser_url`, else the
/// service's own binding.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct EvaluateRequest {
    #[serde(default)]
    pub dataset: Option<Vec<DialogueRecord>>,
    #[serde(default)]
    pub dataset_path: Option<String>,
    #[serde(default)]
    pub predictions: Option<Vec<PredictionRecord>>,
    #[serde(default)]
    pub parser_url: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
}

type SessionMap = HashMap<String, Arc<Mutex<Session>>>;

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<RwLock<SessionMap>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::session_not_found(id))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    fn create_session(&self, req: CreateSessionRequest) -> Result<CreateSessionReply, ApiError> {
        let database = match req.initial_db {
            Some(doc) => Database::from_document(doc).map_err(|e| {
                ApiError::new(StatusCode::BAD_REQUEST, "format_error", e.to_string())
            })?,
            None => Database::new(),
        };
        let clock = req.clock_now.unwrap_or(self.config.default_clock);
        let id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let session = Session {
            id: id.clone(),
            context: EvaluationContext::new(clock, database),
            created_at,
            transcript: Vec::new(),
        };
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(CreateSessionReply {
            session_id: id,
            clock_now: clock,
        })
    }

    async fn chat(&self, id: &str, req: ChatRequest) -> Result<TurnReply, ApiError> {
        let session = self.session(id)?;
        let mut guard = session.lock().await;
        let request = ParseRequest {
            utterance: req.utterance.clone(),
            prev_agent_utterance: guard.last_agent_utterance(),
            dialogue_history: guard.transcript.iter().map(|e| e.text.clone()).collect(),
        };
        let parsed = match (req.parser_url, &self.config.binding) {
            (None, ParserBinding::Stub) => Ok(stub_parse(
                &request.utterance,
                request.prev_agent_utterance.as_deref(),
            )),
            (url, binding) => {
                let binding = binding.clone();
                let (timeout, retries) = (self.config.timeout, self.config.max_retries);
                // The blocking client must stay off the async worker threads.
                tokio::task::spawn_blocking(move || match url {
                    Some(url) => RemoteParser::new(url, timeout, retries).parse(&request),
                    None => binding.parse(&request),
                })
                .await
                .expect("parser task completes")
            }
        };
        let program = parsed
            .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "parser_unavailable", e.to_string()))?;
        Ok(guard.apply(req.utterance, program.unwrap_or_default()))
    }

    async fn execute(&self, id: &str, req: ExecuteRequest) -> Result<TurnReply, ApiError> {
        let session = self.session(id)?;
        let mut guard = session.lock().await;
        Ok(guard.apply(req.program.clone(), req.program))
    }

    async fn calendar(&self, id: &str) -> Result<DatabaseDocument, ApiError> {
        let session = self.session(id)?;
        let guard = session.lock().await;
        Ok(guard.context.database.to_document())
    }

    async fn transcript(&self, id: &str) -> Result<Vec<TranscriptEntry>, ApiError> {
        let session = self.session(id)?;
        let guard = session.lock().await;
        Ok(guard.transcript.clone())
    }

    async fn evaluate(&self, req: EvaluateRequest) -> Result<EvalReport, ApiError> {
        let config = Arc::clone(&self.config);
        tokio::task::spawn_blocking(move || {
            let dataset = match (req.dataset, req.dataset_path) {
                (Some(d), None) => d,
                (None, Some(path)) => load_dataset(&path).map_err(|e| {
                    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "dataset_error", e.to_string())
                })?,
                _ => return Err(ApiError::invalid("give exactly one of dataset and dataset_path")),
            };
            let source: Box<dyn PredictionSource> = match (req.predictions, req.parser_url) {
                (Some(_), Some(_)) => {
                    return Err(ApiError::invalid("give at most one of predictions and parser_url"))
                }
                (Some(p), None) => Box::new(OfflinePredictions::new(p)),
                (None, Some(url)) => Box::new(RemoteParser::new(url, config.timeout, config.max_retries)),
                (None, None) => match &config.binding {
                    ParserBinding::Stub => Box::new(StubParser),
                    ParserBinding::Remote(remote) => Box::new(remote.clone()),
                },
            };
            run_benchmark(&dataset, source.as_ref(), RunOptions { workers: req.workers }).map_err(|e| {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "dataset_error", e.to_string())
            })
        })
        .await
        .expect("evaluation task completes")
    }
}

fn json_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    required_body(body)
}

fn required_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(format!("bad request body: {e}")))
}

async fn create_session_handler(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<CreateSessionReply>), ApiError> {
    let req = json_body(&body)?;
    Ok((StatusCode::CREATED, Json(state.create_session(req)?)))
}

async fn chat_handler(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnReply>, ApiError> {
    let req = required_body(&body)?;
    Ok(Json(state.chat(&id, req).await?))
}

async fn execute_handler(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnReply>, ApiError> {
    let req = required_body(&body)?;
    Ok(Json(state.execute(&id, req).await?))
}

async fn calendar_handler(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<DatabaseDocument>, ApiError> {
    Ok(Json(state.calendar(&id).await?))
}

async fn transcript_handler(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Vec<TranscriptEntry>>, ApiError> {
    Ok(Json(state.transcript(&id).await?))
}

async fn evaluate_handler(State(state): State<AppState>, body: Bytes) -> Result<Json<EvalReport>, ApiError> {
    let req = required_body(&body)?;
    Ok(Json(state.evaluate(req).await?))
}

async fn parse_handler(body: Bytes) -> Result<Json<ParseResponse>, ApiError> {
    let req: ParseRequest = required_body(&body)?;
    let program = stub_parse(&req.utterance, req.prev_agent_utterance.as_deref()).unwrap_or_default();
    Ok(Json(ParseResponse { program }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session_handler))
        .route("/session/{id}/chat", post(chat_handler))
        .route("/session/{id}/execute", post(execute_handler))
        .route("/session/{id}/calendar", get(calendar_handler))
        .route("/session/{id}/transcript", get(transcript_handler))
        .route("/evaluate", post(evaluate_handler))
        .route("/parse", post(parse_handler))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

/// Serves on `port` until interrupted.
pub fn serve(config: ServiceConfig, port: u16) -> io::Result<()> {
    let listener = StdTcpListener::bind(("0.0.0.0", port))?;
    listener.set_nonblocking(true)?;
    let app = router(AppState::new(config));
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}

/// A service running on a background thread, stopped on drop.
pub struct ServiceHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServiceHandle {
    /// Binds `addr` (port 0 picks a free port) and starts serving `router`.
    pub fn spawn_router(app: Router, addr: SocketAddr) -> io::Result<ServiceHandle> {
        let listener = StdTcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
            })
        });
        Ok(ServiceHandle {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn spawn(config: ServiceConfig) -> io::Result<ServiceHandle> {
        Self::spawn_router(router(AppState::new(config)), ([127, 0, 0, 1], 0).into())
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(thread) => thread.join().unwrap_or_else(|_| Err(io::Error::other("service thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}
