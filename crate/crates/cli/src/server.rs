//! HTTP JSON API over the review queue.
//!
//! - `GET /pairs?status=pending&offset=0&limit=50`
//! - `GET /pairs/{id}`
//! - `POST /pairs/{id}/decision` with `{"accept": [dest ids]}` or `{"reject": true}`
//! - `GET /metrics`

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::info;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::RwLock;

use crate::review::{DecisionRequest, ReviewError, ReviewState, ReviewStatus};

pub type SharedState = Arc<RwLock<ReviewState>>;

/// Supplies decision timestamps; swapped out in tests.
pub type Clock = Arc<dyn Fn() -> String + Send + Sync>;

#[derive(Clone)]
struct App {
    state: SharedState,
    clock: Clock,
}

pub fn system_clock() -> Clock {
    Arc::new(|| chrono::Utc::now().to_rfc3339())
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let status = match e {
            ReviewError::NotFound(_) => StatusCode::NOT_FOUND,
            ReviewError::AlreadyDecided(_) => StatusCode::CONFLICT,
            ReviewError::Malformed(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

const DEFAULT_LIMIT: usize = 50;
const MAX_LIMIT: usize = 500;

#[derive(Debug, Deserialize)]
struct ListParams {
    status: Option<ReviewStatus>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_pairs(
    State(app): State<App>,
    params: Result<Query<ListParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(p) = params.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    let limit = p.limit.unwrap_or(DEFAULT_LIMIT).min(MAX_LIMIT);
    let page = app.state.read().await.list(p.status, p.offset.unwrap_or(0), limit);
    Ok(Json(page).into_response())
}

async fn get_pair(State(app): State<App>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let state = app.state.read().await;
    let item = state.get(&id).ok_or(ReviewError::NotFound(id))?;
    Ok(Json(item).into_response())
}

async fn decide(
    State(app): State<App>,
    Path(id): Path<String>,
    body: Result<Json<DecisionRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = body.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    let mut state = app.state.write().await;
    let item = state.decide(&id, request, (app.clock)())?;
    Ok(Json(item).into_response())
}

async fn metrics(State(app): State<App>) -> Result<Response, ApiError> {
    let m = app.state.read().await.metrics()?;
    Ok(Json(m).into_response())
}

pub fn router(state: SharedState, clock: Clock) -> Router {
    Router::new()
        .route("/pairs", get(list_pairs))
        .route("/pairs/{id}", get(get_pair))
        .route("/pairs/{id}/decision", post(decide))
        .route("/metrics", get(metrics))
        .with_state(App { state, clock })
}

/// Serves until ctrl-c.
pub async fn serve(state: ReviewState, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("review service listening on http://{}", listener.local_addr()?);
    let app = router(Arc::new(RwLock::new(state)), system_clock());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
