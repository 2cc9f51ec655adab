//! Clients the orchestrator and harness use to reach an inference service.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use thiserror::Error;

use crate::service::InferenceHandler;
use crate::wire::{
    parse_response, request_to_json, InferenceRequest, InferenceResponse, ProtocolError,
};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("inference deadline of {0:?} exceeded")]
    Timeout(Duration),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("service answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
}

#[async_trait]
pub trait InferenceClient: Send + Sync {
    async fn infer(&self, req: &InferenceRequest) -> Result<InferenceResponse, ClientError>;
}

/// Client for a remote `POST /infer` endpoint.
#[derive(Debug, Clone)]
pub struct HttpInferenceClient {
    url: String,
    deadline: Duration,
    http: reqwest::Client,
}

impl HttpInferenceClient {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8081`.
    pub fn new(base_url: &str, deadline: Duration) -> Self {
        let http = reqwest::Client::builder()
            .timeout(deadline)
            .build()
            .expect("http client");
        Self {
            url: format!("{}/infer", base_url.trim_end_matches('/')),
            deadline,
            http,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

#[async_trait]
impl InferenceClient for HttpInferenceClient {
    async fn infer(&self, req: &InferenceRequest) -> Result<InferenceResponse, ClientError> {
        let sent = self
            .http
            .post(&self.url)
            .header("content-type", "application/json")
            .body(request_to_json(req))
            .send()
            .await;
        let resp = match sent {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Err(ClientError::Timeout(self.deadline)),
            Err(e) => return Err(ClientError::Transport(e.to_string())),
        };
        let status = resp.status().as_u16();
        let body = match resp.bytes().await {
            Ok(b) => b,
            Err(e) if e.is_timeout() => return Err(ClientError::Timeout(self.deadline)),
            Err(e) => return Err(ClientError::Transport(e.to_string())),
        };
        if status != 200 {
            return Err(ClientError::Status {
                status,
                body: String::from_utf8_lossy(&body).into_owned(),
            });
        }
        Ok(parse_response(&body)?)
    }
}

/// In-process client: calls a handler directly on a blocking thread.
#[derive(Clone)]
pub struct LocalInferenceClient {
    handler: Arc<dyn InferenceHandler>,
}

impl LocalInferenceClient {
    pub fn new(handler: Arc<dyn InferenceHandler>) -> Self {
        Self { handler }
    }
}

#[async_trait]
impl InferenceClient for LocalInferenceClient {
    async fn infer(&self, req: &InferenceRequest) -> Result<InferenceResponse, ClientError> {
        let handler = self.handler.clone();
        let req = req.clone();
        let resp = tokio::task::spawn_blocking(move || handler.handle(&req))
            .await
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        resp.validate()?;
        Ok(resp)
    }
}
