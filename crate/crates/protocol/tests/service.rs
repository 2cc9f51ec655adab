mod common;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use arena_protocol::{
    parse_request, router, router_with_deadline, Baseline, ClientError, HttpInferenceClient,
    InferenceClient, InferenceHandler, InferenceRequest, InferenceResponse, LocalInferenceClient,
    FALLBACK_DIALOG, INFERENCE_DEADLINE,
};
use common::fixtures;

async fn spawn(app: axum::Router) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

fn fixture_request() -> InferenceRequest {
    let text = std::fs::read_to_string(fixtures().join("protocol/request.json")).unwrap();
    parse_request(text.as_bytes()).unwrap()
}

fn baseline() -> Arc<dyn InferenceHandler> {
    Arc::new(Baseline::new(common::library()))
}

struct Slow(Duration);

impl InferenceHandler for Slow {
    fn handle(&self, req: &InferenceRequest) -> InferenceResponse {
        std::thread::sleep(self.0);
        InferenceResponse::finish(format!("slow-{}", req.turn_index), None)
    }
}

struct Broken;

impl InferenceHandler for Broken {
    fn handle(&self, _: &InferenceRequest) -> InferenceResponse {
        InferenceResponse::act("bad", Vec::new())
    }
}

#[test]
fn default_deadline_is_ten_seconds() {
    assert_eq!(INFERENCE_DEADLINE, Duration::from_secs(10));
}

#[tokio::test]
async fn healthz_answers_ok() {
    let addr = spawn(router(baseline())).await;
    let resp = reqwest::get(format!("http://{addr}/healthz"))
        .await
        .unwrap();
    assert_eq!(resp.status(), 200);
    assert_eq!(resp.text().await.unwrap(), "ok");
}

#[tokio::test]
async fn infer_over_http_matches_in_process() {
    let addr = spawn(router(baseline())).await;
    let remote = HttpInferenceClient::new(&format!("http://{addr}/"), INFERENCE_DEADLINE);
    assert_eq!(remote.url(), format!("http://{addr}/infer"));
    let req = fixture_request();
    let over_http = remote.infer(&req).await.unwrap();
    let local = LocalInferenceClient::new(baseline())
        .infer(&req)
        .await
        .unwrap();
    assert_eq!(over_http, local);
    assert!(!over_http.actions.is_empty());
}

#[tokio::test]
async fn fallback_dialog_over_http() {
    let addr = spawn(router(baseline())).await;
    let client = HttpInferenceClient::new(&format!("http://{addr}"), INFERENCE_DEADLINE);
    let mut req = fixture_request();
    req.utterance = "flibber the zorp".into();
    let resp = client.infer(&req).await.unwrap();
    assert!(resp.turn_complete);
    assert_eq!(resp.dialog.as_deref(), Some(FALLBACK_DIALOG));
}

#[tokio::test]
async fn malformed_bodies_get_400() {
    let addr = spawn(router(baseline())).await;
    let http = reqwest::Client::new();
    let url = format!("http://{addr}/infer");
    let resp = http
        .post(&url)
        .body("{\"schema\": \"simbot-infer/1\", \"kind\": \"req")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);
    let body: serde_json::Value = resp.json().await.unwrap();
    assert_eq!(body["error"], "MalformedPayload");

    let text = std::fs::read_to_string(fixtures().join("protocol/request.json")).unwrap();
    let resp = http
        .post(&url)
        .body(text.replace("simbot-infer/1", "simbot-infer/9"))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);
    let body: serde_json::Value = resp.json().await.unwrap();
    assert_eq!(body["error"], "SchemaVersionUnsupported");
}

#[tokio::test]
async fn slow_handler_hits_the_deadline() {
    let app = router_with_deadline(
        Arc::new(Slow(Duration::from_millis(400))),
        Duration::from_millis(50),
    );
    let addr = spawn(app).await;
    let http = reqwest::Client::new();
    let text = std::fs::read_to_string(fixtures().join("protocol/request.json")).unwrap();
    let resp = http
        .post(format!("http://{addr}/infer"))
        .body(text)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 504);
}

#[tokio::test]
async fn client_times_out_on_a_slow_service() {
    let addr = spawn(router(Arc::new(Slow(Duration::from_millis(500))))).await;
    let client = HttpInferenceClient::new(&format!("http://{addr}"), Duration::from_millis(100));
    let err = client.infer(&fixture_request()).await.unwrap_err();
    assert!(matches!(err, ClientError::Timeout(_)), "{err:?}");
}

#[tokio::test]
async fn invalid_service_responses_are_protocol_errors() {
    let addr = spawn(router(Arc::new(Broken))).await;
    let client = HttpInferenceClient::new(&format!("http://{addr}"), INFERENCE_DEADLINE);
    assert!(matches!(
        client.infer(&fixture_request()).await,
        Err(ClientError::Protocol(_))
    ));
    let local = LocalInferenceClient::new(Arc::new(Broken));
    assert!(matches!(
        local.infer(&fixture_request()).await,
        Err(ClientError::Protocol(_))
    ));
}

#[tokio::test]
async fn unreachable_service_is_a_transport_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let client = HttpInferenceClient::new(&format!("http://{addr}"), Duration::from_secs(2));
    assert!(matches!(
        client.infer(&fixture_request()).await,
        Err(ClientError::Transport(_))
    ));
}
