//! JSON inference API over a loaded bundle.
//!
//! `POST /api/comment`, `POST /api/legal` and `GET /api/health`. Invalid
//! requests get a 4xx status and a body `{"error": <code>, "detail": <text>}`.

use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scc_chess::{parse_move_text, Board, ChessError};
use scc_core::commentary::{check_horizon, Bundle, CommentCategory, CommentOutput, GenerationConfig};
use scc_core::CoreError;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::ServeArgs;
use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommentRequest {
    pub fen: String,
    #[serde(rename = "move")]
    pub mv: String,
    /// Defaults to every category.
    #[serde(default)]
    pub categories: Option<Vec<String>>,
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Beam width; 1 is greedy. Defaults to the bundle's setting.
    #[serde(default)]
    pub beam: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct LegalRequest {
    pub fen: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LegalResponse {
    pub moves: Vec<String>,
}

/// A rejected request.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn bad(code: &'static str, detail: impl ToString) -> ApiError {
        ApiError { status: StatusCode::BAD_REQUEST, code, detail: detail.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "detail": self.detail}))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> ApiError {
        ApiError { status: r.status(), code: "invalid_body", detail: r.body_text() }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> ApiError {
        match e {
            CoreError::MoveNotLegal { .. } | CoreError::Chess(ChessError::IllegalMove { .. }) => {
                ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, code: "illegal_move", detail: e.to_string() }
            }
            CoreError::Config(_) => ApiError::bad("invalid_parameter", e),
            _ => ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", detail: e.to_string() },
        }
    }
}

fn parse_board(fen: &str) -> Result<Board, ApiError> {
    Board::from_fen(fen).map_err(|e| ApiError::bad("invalid_fen", e))
}

fn parse_categories(names: Option<&[String]>) -> Result<Vec<CommentCategory>, ApiError> {
    let Some(names) = names else { return Ok(CommentCategory::ALL.to_vec()) };
    if names.is_empty() {
        return Err(ApiError::bad("invalid_category", "categories must not be empty"));
    }
    names.iter().map(|n| n.parse().map_err(|e: CoreError| ApiError::bad("invalid_category", e))).collect()
}

/// Validated inputs of a comment request.
struct CommentJob {
    board: Board,
    mv: scc_chess::Move,
    categories: Vec<CommentCategory>,
    generation: GenerationConfig,
    horizon: usize,
}

fn validate(bundle: &Bundle, req: &CommentRequest) -> Result<CommentJob, ApiError> {
    let board = parse_board(&req.fen)?;
    let mv = parse_move_text(&board, &req.mv).map_err(|e| match e {
        ChessError::IllegalMove { .. } => {
            ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, code: "illegal_move", detail: e.to_string() }
        }
        _ => ApiError::bad("invalid_move", e),
    })?;
    let categories = parse_categories(req.categories.as_deref())?;
    let horizon = req.horizon.unwrap_or(bundle.manifest.horizon);
    check_horizon(horizon).map_err(|e| ApiError::bad("invalid_horizon", e))?;
    let mut generation = bundle.manifest.generation;
    if let Some(beam) = req.beam {
        generation.beam_width = beam;
    }
    generation.validate().map_err(|e| ApiError::bad("invalid_beam", e))?;
    Ok(CommentJob { board, mv, categories, generation, horizon })
}

async fn comment(
    State(bundle): State<Arc<Bundle>>,
    body: Result<Json<CommentRequest>, JsonRejection>,
) -> Result<Json<CommentOutput>, ApiError> {
    let Json(req) = body?;
    let job = validate(&bundle, &req)?;
    let output = tokio::task::spawn_blocking(move || {
        bundle.comment(&job.board, &job.mv, &job.categories, &job.generation, job.horizon)
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        code: "internal",
        detail: e.to_string(),
    })??;
    Ok(Json(output))
}

async fn legal(body: Result<Json<LegalRequest>, JsonRejection>) -> Result<Json<LegalResponse>, ApiError> {
    let Json(req) = body?;
    let board = parse_board(&req.fen)?;
    Ok(Json(LegalResponse { moves: board.legal_moves().iter().map(|m| m.to_uci()).collect() }))
}

async fn health(State(bundle): State<Arc<Bundle>>) -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "model_id": bundle.model_id(), "categories": bundle.categories()}))
}

pub fn router(bundle: Arc<Bundle>) -> Router {
    Router::new()
        .route("/api/comment", post(comment))
        .route("/api/legal", post(legal))
        .route("/api/health", get(health))
        .with_state(bundle)
}

/// Serves `bundle` on an already bound listener until the task is dropped.
pub async fn serve_on(listener: tokio::net::TcpListener, bundle: Arc<Bundle>) -> std::io::Result<()> {
    axum::serve(listener, router(bundle)).await
}

pub fn run(a: &ServeArgs) -> Result<(), CliError> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init().ok();
    let bundle = Arc::new(Bundle::load(&a.bundle)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io(Path::new("<runtime>"), e))?;
    let addr = format!("{}:{}", a.host, a.port);
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::io(Path::new(&addr), e))?;
        log::info!("serving bundle {} on http://{addr}", bundle.model_id());
        serve_on(listener, bundle).await.map_err(|e| CliError::io(Path::new(&addr), e))
    })
}
