#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use arena_core::{Action, SceneLibrary};
use arena_orchestrator::{Clock, Config, Orchestrator, TurnLimits};
use arena_protocol::{ClientError, InferenceClient, InferenceRequest, InferenceResponse};
use async_trait::async_trait;
use chrono::{DateTime, TimeZone, Utc};

pub const MISSIONS: [&str; 13] = [
    "chill_soda",
    "clean_plate",
    "cook_egg",
    "deliver_spanner",
    "disinfect_computer",
    "eat_donut",
    "empty_mug",
    "fill_bottle",
    "heat_burger",
    "light_lamp",
    "make_coffee",
    "repair_bowl",
    "slice_bread",
];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn library() -> Arc<SceneLibrary> {
    let f = fixtures();
    Arc::new(SceneLibrary::load(f.join("classes.json"), f.join("scenes")).unwrap())
}

pub fn transcript(id: &str) -> Vec<String> {
    let text =
        std::fs::read_to_string(fixtures().join("transcripts").join(format!("{id}.json"))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["utterances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|u| u.as_str().unwrap().to_string())
        .collect()
}

pub fn config(data_dir: &Path) -> Config {
    let f = fixtures();
    Config {
        classes: f.join("classes.json"),
        scenes: f.join("scenes"),
        catalog: f.join("missions"),
        data_dir: data_dir.to_path_buf(),
        ..Config::default()
    }
}

pub fn orchestrator(data_dir: &Path) -> Orchestrator {
    Orchestrator::builder(config(data_dir))
        .library(library())
        .build()
        .unwrap()
}

pub fn with_client(
    data_dir: &Path,
    limits: TurnLimits,
    client: Arc<dyn InferenceClient>,
) -> Orchestrator {
    let mut cfg = config(data_dir);
    cfg.limits = limits;
    Orchestrator::builder(cfg)
        .library(library())
        .client("baseline", client)
        .build()
        .unwrap()
}

/// Settable clock for idle-timeout tests.
#[derive(Clone)]
pub struct FakeClock(pub Arc<Mutex<DateTime<Utc>>>);

impl FakeClock {
    pub fn new() -> Self {
        Self(Arc::new(Mutex::new(
            Utc.with_ymd_and_hms(2023, 3, 1, 12, 0, 0).unwrap(),
        )))
    }

    pub fn advance(&self, secs: i64) {
        *self.0.lock().unwrap() += chrono::Duration::seconds(secs);
    }

    pub fn clock(&self) -> Clock {
        let inner = self.0.clone();
        Arc::new(move || *inner.lock().unwrap())
    }
}

/// Plays back canned responses, then completes the turn.
pub struct Scripted {
    pub responses: Mutex<VecDeque<InferenceResponse>>,
    pub delay: Duration,
    pub calls: Mutex<Vec<InferenceRequest>>,
}

impl Scripted {
    pub fn new(responses: Vec<InferenceResponse>) -> Arc<Self> {
        Self::slow(responses, Duration::ZERO)
    }

    pub fn slow(responses: Vec<InferenceResponse>, delay: Duration) -> Arc<Self> {
        Arc::new(Self {
            responses: Mutex::new(responses.into()),
            delay,
            calls: Mutex::new(Vec::new()),
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.lock().unwrap().len()
    }
}

#[async_trait]
impl InferenceClient for Scripted {
    async fn infer(&self, req: &InferenceRequest) -> Result<InferenceResponse, ClientError> {
        let n = {
            let mut calls = self.calls.lock().unwrap();
            calls.push(req.clone());
            calls.len()
        };
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        let next = self.responses.lock().unwrap().pop_front();
        Ok(
            next.unwrap_or_else(|| {
                InferenceResponse::finish(format!("r{n}"), Some("Done.".into()))
            }),
        )
    }
}

/// Always answers with the same actions and never completes the turn.
pub struct Endless(pub Vec<Action>);

#[async_trait]
impl InferenceClient for Endless {
    async fn infer(&self, req: &InferenceRequest) -> Result<InferenceResponse, ClientError> {
        Ok(InferenceResponse::act(
            format!("e{}", req.action_history.len()),
            self.0.clone(),
        ))
    }
}

pub fn act(actions: Vec<Action>) -> InferenceResponse {
    InferenceResponse::act("scripted", actions)
}

pub fn blessing() -> bool {
    std::env::var_os("ARENA_BLESS").is_some()
}

pub fn golden(name: &str, actual: &str) {
    let path = fixtures().join(name);
    if blessing() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}
