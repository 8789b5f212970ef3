//! HTTP service for equivalence checks and live games against the engine.
//!
//! Sessions live in memory and expire after a configurable idle time. Every mutation of a
//! session happens under that session's lock, so concurrent submissions serialize.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::backforth::BackForth;
use crate::error::Error;
use crate::fo::{distinguishing_sentence, Sentence};
use crate::game::{GamePosition, GameSolver, Move, Player, Ply, Side};
use crate::structures::{check_signatures, parse_structure, Structure};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub max_size: usize,
    pub max_rounds: usize,
    pub session_ttl: Duration,
    /// Separating sentences longer than this are left out of responses.
    pub max_sentence_bytes: usize,
    /// Directory of static client assets served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            max_size: 12,
            max_rounds: 6,
            session_ttl: Duration::from_secs(30 * 60),
            max_sentence_bytes: 1 << 20,
            ui_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    SignatureMismatch,
    SizeCapExceeded,
    NotFound,
    NotYourTurn,
    IllegalMove,
    SessionFinished,
}

impl ErrorCode {
    fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::SignatureMismatch | ErrorCode::IllegalMove => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::SizeCapExceeded => StatusCode::PAYLOAD_TOO_LARGE,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::NotYourTurn | ErrorCode::SessionFinished => StatusCode::CONFLICT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SignatureMismatch => ErrorCode::SignatureMismatch,
            Error::IllegalMove(_) | Error::ElementOutOfRange { .. } => ErrorCode::IllegalMove,
            Error::TerminalPosition => ErrorCode::SessionFinished,
            _ => ErrorCode::BadRequest,
        };
        ApiError::new(code, e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CheckRequest {
    pub a: String,
    pub b: String,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub equivalent: bool,
    pub separation_level: Option<usize>,
    pub sentence: Option<String>,
    pub sentence_omitted: bool,
    pub winner: Player,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSessionRequest {
    pub a: String,
    pub b: String,
    pub rounds: usize,
    pub human_role: Player,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTexts {
    pub left: String,
    pub right: String,
}

/// Everything a client needs to render a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub status: SessionStatus,
    pub winner: Option<Player>,
    pub human_role: Player,
    pub to_move: Option<Player>,
    pub rounds_total: usize,
    pub rounds_done: usize,
    pub structures: StructureTexts,
    pub history: Vec<(usize, usize)>,
    pub pending: Option<Move>,
    pub log: Vec<Ply>,
    pub legal_moves: Vec<Move>,
    pub sentence: Option<String>,
    pub sentence_omitted: bool,
    pub created_at: u64,
}

pub struct Session {
    id: String,
    position: GamePosition,
    solver: GameSolver,
    human_role: Player,
    created_at: SystemTime,
    touched: Instant,
    log: Vec<Ply>,
    sentence: Option<String>,
    sentence_omitted: bool,
    max_sentence_bytes: usize,
}

impl Session {
    pub fn human_role(&self) -> Player {
        self.human_role
    }

    pub fn position(&self) -> &GamePosition {
        &self.position
    }

    pub fn winner(&self) -> Option<Player> {
        self.position.terminal_winner()
    }

    fn play(&mut self, mv: Move) -> Result<(), Error> {
        let player = self.position.to_move().ok_or(Error::TerminalPosition)?;
        self.position = self.position.apply_move(mv)?;
        self.log.push(Ply { player, mv });
        Ok(())
    }

    fn engine_replies(&mut self) {
        while let Some(player) = self.position.to_move() {
            if player == self.human_role {
                break;
            }
            let mv = self.solver.best_move(&self.position).expect("non-terminal position");
            self.play(mv).expect("engine moves are legal");
        }
        if self.sentence.is_none() && !self.sentence_omitted && self.winner() == Some(Player::Spoiler) {
            let (a, b) = (self.position.left(), self.position.right());
            let phi =
                distinguishing_sentence(a, b, self.position.rounds_total()).expect("signatures checked at creation");
            (self.sentence, self.sentence_omitted) = bounded(phi, self.max_sentence_bytes);
        }
    }

    pub fn view(&self) -> SessionView {
        let p = &self.position;
        SessionView {
            id: self.id.clone(),
            status: if p.is_terminal() {
                SessionStatus::Finished
            } else {
                SessionStatus::Active
            },
            winner: self.winner(),
            human_role: self.human_role,
            to_move: p.to_move(),
            rounds_total: p.rounds_total(),
            rounds_done: p.rounds_done(),
            structures: StructureTexts {
                left: p.left().to_text(),
                right: p.right().to_text(),
            },
            history: p.history().pairs().to_vec(),
            pending: p.pending(),
            log: self.log.clone(),
            legal_moves: p.legal_moves().unwrap_or_default(),
            sentence: self.sentence.clone(),
            sentence_omitted: self.sentence_omitted,
            created_at: self.created_at.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}

fn bounded(phi: Option<Sentence>, limit: usize) -> (Option<String>, bool) {
    match phi.map(|p| p.to_string()) {
        Some(text) if text.len() > limit => (None, true),
        text => (text, false),
    }
}

/// In-memory session table plus the service limits.
pub struct SessionStore {
    config: ServerConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn new(config: ServerConfig) -> Self {
        SessionStore {
            config,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    fn parse_pair(&self, a: &str, b: &str) -> Result<(Structure, Structure), ApiError> {
        let parse = |label: &str, text: &str| {
            parse_structure(text).map_err(|e| ApiError::new(ErrorCode::BadRequest, format!("structure {label}: {e}")))
        };
        let (a, b) = (parse("a", a)?, parse("b", b)?);
        check_signatures(&a, &b)?;
        for s in [&a, &b] {
            if s.size() > self.config.max_size {
                return Err(ApiError::new(
                    ErrorCode::SizeCapExceeded,
                    format!(
                        "structure `{}` has {} elements; the limit is {}",
                        s.name(),
                        s.size(),
                        self.config.max_size
                    ),
                ));
            }
        }
        Ok((a, b))
    }

    fn check_rounds(&self, rounds: usize) -> Result<(), ApiError> {
        if rounds > self.config.max_rounds {
            return Err(ApiError::new(
                ErrorCode::SizeCapExceeded,
                format!("{rounds} rounds requested; the limit is {}", self.config.max_rounds),
            ));
        }
        Ok(())
    }

    /// Equivalence verdict from the back-and-forth side, winner from the game side.
    pub fn check(&self, req: &CheckRequest) -> Result<CheckReport, ApiError> {
        let (a, b) = self.parse_pair(&req.a, &req.b)?;
        self.check_rounds(req.rounds)?;
        let mut bf = BackForth::new(&a, &b)?;
        let equivalent = bf.n_equivalent(req.rounds);
        let separation_level = bf.separation_level(req.rounds);
        let (sentence, sentence_omitted) = bounded(
            distinguishing_sentence(&a, &b, req.rounds)?,
            self.config.max_sentence_bytes,
        );
        let start = GamePosition::new(a, b, req.rounds)?;
        let winner = GameSolver::for_position(&start).winner(&start);
        Ok(CheckReport {
            equivalent,
            separation_level,
            sentence,
            sentence_omitted,
            winner,
        })
    }

    pub fn create(&self, req: &CreateSessionRequest) -> Result<SessionView, ApiError> {
        if req.rounds == 0 {
            return Err(ApiError::new(ErrorCode::BadRequest, "rounds must be at least 1"));
        }
        let (a, b) = self.parse_pair(&req.a, &req.b)?;
        self.check_rounds(req.rounds)?;
        let position = GamePosition::new(a, b, req.rounds)?;
        let mut session = Session {
            id: uuid::Uuid::new_v4().simple().to_string(),
            solver: GameSolver::for_position(&position),
            position,
            human_role: req.human_role,
            created_at: SystemTime::now(),
            touched: Instant::now(),
            log: Vec::new(),
            sentence: None,
            sentence_omitted: false,
            max_sentence_bytes: self.config.max_sentence_bytes,
        };
        session.engine_replies();
        let view = session.view();
        self.purge_expired();
        self.sessions
            .lock()
            .unwrap()
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn lookup(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.purge_expired();
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no session `{id}`")))
    }

    pub fn get(&self, id: &str) -> Result<SessionView, ApiError> {
        let session = self.lookup(id)?;
        let mut s = session.lock().unwrap();
        s.touched = Instant::now();
        Ok(s.view())
    }

    /// Applies the human's move and then the engine's replies until the human is to move
    /// again or the game is over.
    pub fn submit(&self, id: &str, mv: Move) -> Result<SessionView, ApiError> {
        self.submit_as(id, None, mv)
    }

    /// As [`SessionStore::submit`], additionally rejecting the move when `player` is given
    /// and is not the one to move.
    pub fn submit_as(&self, id: &str, player: Option<Player>, mv: Move) -> Result<SessionView, ApiError> {
        let session = self.lookup(id)?;
        let mut s = session.lock().unwrap();
        s.touched = Instant::now();
        match s.position.to_move() {
            None => return Err(ApiError::new(ErrorCode::SessionFinished, "the game is over")),
            Some(p) if p != s.human_role || player.is_some_and(|q| q != p) => {
                return Err(ApiError::new(ErrorCode::NotYourTurn, format!("it is {p}'s turn")))
            }
            Some(_) => {}
        }
        s.play(mv)?;
        s.engine_replies();
        Ok(s.view())
    }

    pub fn delete(&self, id: &str) -> Result<(), ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .remove(id)
            .map(drop)
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no session `{id}`")))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn purge_expired(&self) {
        let ttl = self.config.session_ttl;
        // A session whose lock is held is in use and therefore not idle.
        self.sessions
            .lock()
            .unwrap()
            .retain(|_, s| s.try_lock().map_or(true, |s| s.touched.elapsed() < ttl));
    }
}

#[derive(Debug, Clone, Deserialize)]
struct MoveRequest {
    side: Side,
    element: usize,
    #[serde(default)]
    player: Option<Player>,
}

type Shared = Arc<SessionStore>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::new(ErrorCode::BadRequest, format!("request failed: {e}"))))
}

async fn check_handler(
    State(store): State<Shared>,
    body: Result<Json<CheckRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<CheckReport>, ApiError> {
    let Json(req) = body.map_err(bad_body)?;
    blocking(move || store.check(&req)).await.map(Json)
}

async fn create_handler(
    State(store): State<Shared>,
    body: Result<Json<CreateSessionRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(req) = body.map_err(bad_body)?;
    blocking(move || store.create(&req))
        .await
        .map(|v| (StatusCode::CREATED, Json(v)))
}

async fn get_handler(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    store.get(&id).map(Json)
}

async fn move_handler(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let Json(req) = body.map_err(bad_body)?;
    blocking(move || store.submit_as(&id, req.player, Move::new(req.side, req.element)))
        .await
        .map(Json)
}

async fn delete_handler(State(store): State<Shared>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    store.delete(&id).map(|()| StatusCode::NO_CONTENT)
}

fn bad_body(e: axum::extract::rejection::JsonRejection) -> ApiError {
    ApiError::new(ErrorCode::BadRequest, e.body_text())
}

pub fn router(store: Shared) -> Router {
    let ui_dir = store.config().ui_dir.clone();
    let api = Router::new()
        .route("/api/check", post(check_handler))
        .route("/api/sessions", post(create_handler))
        .route("/api/sessions/{id}", get(get_handler).delete(delete_handler))
        .route("/api/sessions/{id}/moves", post(move_handler))
        .with_state(store);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves the API on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: ServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let store = Arc::new(SessionStore::new(config));
    let sweeper = {
        let store = store.clone();
        tokio::spawn(async move {
            let period = (store.config().session_ttl / 2).max(Duration::from_secs(1));
            loop {
                tokio::time::sleep(period).await;
                store.purge_expired();
            }
        })
    };
    let result = axum::serve(listener, router(store))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    result
}

/// Binds `addr` and returns the listener with its actual local address.
pub async fn bind(addr: SocketAddr) -> std::io::Result<(tokio::net::TcpListener, SocketAddr)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((listener, local))
}
