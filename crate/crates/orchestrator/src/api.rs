//! HTTP API.

use std::sync::Arc;
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::error::OrchestratorError;
use crate::orchestrator::{Orchestrator, StreamItem};

pub const NDJSON: &str = "application/x-ndjson";

impl IntoResponse for OrchestratorError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (
            status,
            Json(json!({ "error": self.code(), "message": self.to_string() })),
        )
            .into_response()
    }
}

type AppState = Arc<Orchestrator>;
type ApiResult<T> = Result<T, OrchestratorError>;

#[derive(Deserialize)]
struct CreateSession {
    mission_id: String,
    #[serde(default)]
    team_id: Option<String>,
}

#[derive(Deserialize)]
struct Utterance {
    text: String,
}

#[derive(Deserialize)]
struct RatingBody {
    score: i64,
    #[serde(default)]
    comment: Option<String>,
}

pub fn router(orch: Arc<Orchestrator>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/missions", get(missions))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/utterance", post(utterance))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/rating", post(rating))
        .route("/sessions/{id}/end", post(end))
        .route("/sessions/{id}/log", get(log))
        .with_state(orch)
}

async fn missions(State(o): State<AppState>) -> impl IntoResponse {
    Json(o.missions())
}

async fn create_session(
    State(o): State<AppState>,
    Json(body): Json<CreateSession>,
) -> ApiResult<Response> {
    let created = o.create_session(&body.mission_id, body.team_id.as_deref())?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn session(State(o): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(o.session(&id)?).into_response())
}

async fn utterance(
    State(o): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<Utterance>,
) -> ApiResult<Response> {
    Ok(Json(o.handle_utterance(&id, &body.text).await?).into_response())
}

async fn rating(
    State(o): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<RatingBody>,
) -> ApiResult<Response> {
    Ok(Json(o.submit_rating(&id, body.score, body.comment)?).into_response())
}

async fn end(State(o): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(o.end_session(&id)?).into_response())
}

async fn log(State(o): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let log = o.export_session_log(&id)?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        log.to_canonical_json(),
    )
        .into_response())
}

/// Snapshot frame first, then live events until the session is finalized.
async fn events(State(o): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let sub = o.subscribe(&id)?;
    let first = Bytes::from(sub.snapshot.to_ndjson());
    let state = (Some(first), sub.receiver, sub.closed, o, id);
    let body = stream::unfold(state, |(first, mut rx, closed, o, id)| async move {
        if let Some(b) = first {
            return Some((Ok::<_, std::io::Error>(b), (None, rx, closed, o, id)));
        }
        if closed {
            return None;
        }
        let bytes = match rx.recv().await {
            Ok(StreamItem::Event(env)) => Bytes::from(env.to_ndjson()),
            Ok(StreamItem::Closed) | Err(RecvError::Closed) => return None,
            // Too slow to keep up: resynchronize with a fresh snapshot.
            Err(RecvError::Lagged(_)) => Bytes::from(o.snapshot_frame(&id).ok()?.to_ndjson()),
        };
        Some((Ok(bytes), (None, rx, false, o, id)))
    });
    Ok(([(header::CONTENT_TYPE, NDJSON)], Body::from_stream(body)).into_response())
}

/// Serves the API and reaps idle sessions every `reap_every`.
pub async fn serve(
    listener: tokio::net::TcpListener,
    orch: Arc<Orchestrator>,
    reap_every: Duration,
) -> std::io::Result<()> {
    let reaper = orch.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(reap_every);
        loop {
            tick.tick().await;
            match reaper.reap_idle() {
                Ok(ids) if !ids.is_empty() => {
                    tracing::info!(sessions = ?ids, "reaped idle sessions")
                }
                Ok(_) => {}
                Err(e) => tracing::warn!(error = %e, "reaping idle sessions failed"),
            }
        }
    });
    axum::serve(listener, router(orch)).await
}
