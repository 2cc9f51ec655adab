//! Models under evaluation and the built-in reference models.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use arena_core::{Action, Observation, SceneLibrary, Target, Verb};
use arena_protocol::{
    ActionRecord, Baseline, CompactObservation, DialogTurn, HttpInferenceClient, InferenceClient,
    InferenceMode, InferenceRequest, InferenceResponse, Speaker as WireSpeaker, INFERENCE_DEADLINE,
};
use thiserror::Error;

use crate::error::EdhError;
use crate::instance::{EdhInstance, PastAction};
use crate::log::Speaker;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("model raised: {0}")]
pub struct ModelError(pub String);

/// What a model sees before each prediction.
pub struct EdhView<'a> {
    pub instance: &'a EdhInstance,
    /// Actions executed so far in this run, with outcomes.
    pub predicted: &'a [PastAction],
    pub observation: &'a Observation,
}

/// One model run over one instance. May keep state between calls.
pub trait ModelAdapter: Send {
    fn next_action(&mut self, view: &EdhView<'_>) -> Result<Action, ModelError>;
}

/// Creates a fresh adapter per instance run.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;
    fn start(&self, instance: &EdhInstance) -> Box<dyn ModelAdapter>;
}

struct Repeat(Action);

impl ModelAdapter for Repeat {
    fn next_action(&mut self, _: &EdhView<'_>) -> Result<Action, ModelError> {
        Ok(self.0.clone())
    }
}

/// Predicts the same action forever.
pub struct RepeatModel {
    name: String,
    action: Action,
}

impl RepeatModel {
    pub fn new(name: impl Into<String>, action: Action) -> Self {
        Self {
            name: name.into(),
            action,
        }
    }
}

impl Model for RepeatModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self, _: &EdhInstance) -> Box<dyn ModelAdapter> {
        Box::new(Repeat(self.action.clone()))
    }
}

struct Script(VecDeque<Action>);

impl ModelAdapter for Script {
    fn next_action(&mut self, _: &EdhView<'_>) -> Result<Action, ModelError> {
        Ok(self.0.pop_front().unwrap_or(Action::Stop))
    }
}

/// Predicts a fixed sequence, then Stop.
pub struct ScriptModel {
    name: String,
    actions: Vec<Action>,
}

impl ScriptModel {
    pub fn new(name: impl Into<String>, actions: Vec<Action>) -> Self {
        Self {
            name: name.into(),
            actions,
        }
    }
}

impl Model for ScriptModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self, _: &EdhInstance) -> Box<dyn ModelAdapter> {
        Box::new(Script(self.actions.iter().cloned().collect()))
    }
}

/// Replays the logged follower actions of the instance, then stops.
pub struct OracleModel;

impl Model for OracleModel {
    fn name(&self) -> &str {
        "oracle"
    }

    fn start(&self, instance: &EdhInstance) -> Box<dyn ModelAdapter> {
        Box::new(Script(instance.reference_actions.iter().cloned().collect()))
    }
}

type InferFn = dyn Fn(&InferenceRequest) -> Result<InferenceResponse, String> + Send + Sync;

/// Drives an inference service in EDH mode: the last commander utterance is
/// the instruction, response actions are played one at a time, and the end
/// of the turn becomes Stop.
pub struct ProtocolModel {
    name: String,
    infer: Arc<InferFn>,
    runs: AtomicU64,
}

impl ProtocolModel {
    pub fn new(name: impl Into<String>, infer: Arc<InferFn>) -> Self {
        Self {
            name: name.into(),
            infer,
            runs: AtomicU64::new(0),
        }
    }

    pub fn baseline(library: Arc<SceneLibrary>) -> Self {
        let baseline = Arc::new(Baseline::new(library));
        Self::new(
            "baseline",
            Arc::new(move |req: &InferenceRequest| {
                let resp = baseline.infer(req);
                if resp.turn_complete {
                    baseline.end_session(&req.session_id);
                }
                Ok(resp)
            }),
        )
    }

    pub fn remote(endpoint: &str) -> Self {
        Self::remote_with_deadline(endpoint, INFERENCE_DEADLINE)
    }

    pub fn remote_with_deadline(endpoint: &str, deadline: Duration) -> Self {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(1)
            .enable_all()
            .build()
            .expect("tokio runtime");
        let client = HttpInferenceClient::new(endpoint, deadline);
        let name = format!("remote:{}", client.url());
        Self::new(
            name,
            Arc::new(move |req: &InferenceRequest| {
                runtime
                    .block_on(client.infer(req))
                    .map_err(|e| e.to_string())
            }),
        )
    }
}

impl Model for ProtocolModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self, instance: &EdhInstance) -> Box<dyn ModelAdapter> {
        let run = self.runs.fetch_add(1, Ordering::Relaxed);
        Box::new(ProtocolRun {
            infer: self.infer.clone(),
            session_id: format!("{}#{run}", instance.instance_id),
            queue: VecDeque::new(),
            done: false,
            previous: None,
        })
    }
}

struct ProtocolRun {
    infer: Arc<InferFn>,
    session_id: String,
    queue: VecDeque<Action>,
    done: bool,
    previous: Option<String>,
}

fn wire_speaker(s: Speaker) -> WireSpeaker {
    match s {
        Speaker::Commander => WireSpeaker::User,
        Speaker::Follower => WireSpeaker::Robot,
    }
}

impl ProtocolRun {
    fn request(&self, view: &EdhView<'_>) -> InferenceRequest {
        let inst = view.instance;
        let utterance = inst
            .dialog_history
            .iter()
            .rev()
            .find(|u| u.speaker == Speaker::Commander)
            .or(inst.dialog_history.last())
            .map(|u| u.text.clone())
            .unwrap_or_default();
        InferenceRequest {
            session_id: self.session_id.clone(),
            turn_index: 0,
            utterance,
            observation: CompactObservation::from(view.observation),
            dialog_history: inst
                .dialog_history
                .iter()
                .map(|u| DialogTurn {
                    speaker: wire_speaker(u.speaker),
                    text: u.text.clone(),
                })
                .collect(),
            action_history: inst
                .action_history
                .iter()
                .chain(view.predicted)
                .map(|a| ActionRecord {
                    turn_index: 0,
                    action: a.action.clone(),
                    ok: a.ok,
                })
                .collect(),
            previous_response_id: self.previous.clone(),
            scene_id: inst.initial_state.scene_id.clone(),
            alternatives: Vec::new(),
            mode: InferenceMode::Edh,
        }
    }
}

impl ModelAdapter for ProtocolRun {
    fn next_action(&mut self, view: &EdhView<'_>) -> Result<Action, ModelError> {
        if let Some(a) = self.queue.pop_front() {
            return Ok(a);
        }
        if self.done {
            return Ok(Action::Stop);
        }
        let resp = (self.infer)(&self.request(view)).map_err(ModelError)?;
        resp.validate().map_err(|e| ModelError(e.to_string()))?;
        self.previous = Some(resp.response_id.clone());
        self.done = resp.turn_complete;
        self.queue.extend(resp.actions);
        Ok(self.queue.pop_front().unwrap_or(Action::Stop))
    }
}

pub const BUILTIN_MODELS: [&str; 6] = ["stop", "spin", "forward", "fail", "oracle", "baseline"];

/// `stop` predicts Stop first; `spin` rotates forever without failing;
/// `forward` moves forward forever; `fail` targets an id that does not
/// exist; `oracle` replays the logged segment; `baseline` runs the
/// rule-based agent in EDH mode.
pub fn builtin(name: &str, library: Arc<SceneLibrary>) -> Result<Arc<dyn Model>, EdhError> {
    Ok(match name {
        "stop" => Arc::new(RepeatModel::new("stop", Action::Stop)),
        "spin" => Arc::new(RepeatModel::new("spin", Action::RotateRight)),
        "forward" => Arc::new(RepeatModel::new("forward", Action::MoveForward)),
        "fail" => Arc::new(RepeatModel::new(
            "fail",
            Action::interact(Verb::Pickup, Target::id("no_such_object")),
        )),
        "oracle" => Arc::new(OracleModel),
        "baseline" => Arc::new(ProtocolModel::baseline(library)),
        other => return Err(EdhError::UnknownModel(other.to_string())),
    })
}
