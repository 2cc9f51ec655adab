//! HTTP inference service: `POST /infer` and `GET /healthz`.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;

use crate::baseline::Baseline;
use crate::wire::{
    parse_request, response_to_json, InferenceRequest, InferenceResponse, ProtocolError,
};

pub const INFERENCE_DEADLINE: Duration = Duration::from_secs(10);

/// Anything that turns a request into a response.
pub trait InferenceHandler: Send + Sync + 'static {
    fn handle(&self, req: &InferenceRequest) -> InferenceResponse;
}

impl InferenceHandler for Baseline {
    fn handle(&self, req: &InferenceRequest) -> InferenceResponse {
        self.infer(req)
    }
}

#[derive(Clone)]
struct ServiceState {
    handler: Arc<dyn InferenceHandler>,
    deadline: Duration,
}

fn error_body(status: StatusCode, kind: &str, message: &str) -> Response {
    let body = serde_json::json!({ "error": kind, "message": message }).to_string();
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn infer(State(state): State<ServiceState>, body: Bytes) -> Response {
    let req = match parse_request(&body) {
        Ok(r) => r,
        Err(e @ ProtocolError::MalformedPayload(_)) => {
            return error_body(StatusCode::BAD_REQUEST, "MalformedPayload", &e.to_string())
        }
        Err(e @ ProtocolError::SchemaVersionUnsupported(_)) => {
            return error_body(
                StatusCode::BAD_REQUEST,
                "SchemaVersionUnsupported",
                &e.to_string(),
            )
        }
    };
    let handler = state.handler.clone();
    let work = tokio::task::spawn_blocking(move || handler.handle(&req));
    match tokio::time::timeout(state.deadline, work).await {
        Ok(Ok(resp)) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            response_to_json(&resp),
        )
            .into_response(),
        Ok(Err(e)) => error_body(
            StatusCode::INTERNAL_SERVER_ERROR,
            "HandlerFailed",
            &e.to_string(),
        ),
        Err(_) => error_body(
            StatusCode::GATEWAY_TIMEOUT,
            "DeadlineExceeded",
            "inference deadline exceeded",
        ),
    }
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(handler: Arc<dyn InferenceHandler>) -> Router {
    router_with_deadline(handler, INFERENCE_DEADLINE)
}

pub fn router_with_deadline(handler: Arc<dyn InferenceHandler>, deadline: Duration) -> Router {
    Router::new()
        .route("/infer", post(infer))
        .route("/healthz", get(healthz))
        .with_state(ServiceState { handler, deadline })
}

/// Serves the inference API on `listener` until the task is dropped.
pub async fn serve(
    listener: tokio::net::TcpListener,
    handler: Arc<dyn InferenceHandler>,
) -> std::io::Result<()> {
    axum::serve(listener, router(handler)).await
}
