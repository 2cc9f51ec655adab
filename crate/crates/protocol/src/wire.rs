//! `simbot-infer/1` request and response documents.

use arena_core::render::{Observation, VisibleObject};
use arena_core::world::AgentPose;
use arena_core::Action;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_SCHEMA: &str = "simbot-infer/1";
/// Upper bound on actions carried by one response.
pub const MAX_ACTIONS_PER_RESPONSE: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("unsupported schema version {0:?}")]
    SchemaVersionUnsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogTurn {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub turn_index: u32,
    pub action: Action,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMode {
    #[default]
    Live,
    Edh,
}

/// Observation with run-length encoded rasters: `[value, run]` pairs in
/// row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactObservation {
    pub width: u32,
    pub height: u32,
    pub visible: Vec<VisibleObject>,
    pub cells: Vec<[u32; 2]>,
    pub depth_mm: Vec<[u32; 2]>,
    pub pose: AgentPose,
    pub tick: u64,
}

fn rle(values: &[u16]) -> Vec<[u32; 2]> {
    let mut out: Vec<[u32; 2]> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some(last) if last[0] == *v as u32 => last[1] += 1,
            _ => out.push([*v as u32, 1]),
        }
    }
    out
}

fn unrle(runs: &[[u32; 2]], n: usize) -> Result<Vec<u16>, ProtocolError> {
    let mut out = Vec::with_capacity(n);
    for [v, run] in runs {
        let v = u16::try_from(*v)
            .map_err(|_| ProtocolError::MalformedPayload(format!("raster value {v}")))?;
        if out.len() + *run as usize > n {
            return Err(ProtocolError::MalformedPayload(
                "raster runs exceed dimensions".into(),
            ));
        }
        out.extend(std::iter::repeat_n(v, *run as usize));
    }
    if out.len() != n {
        return Err(ProtocolError::MalformedPayload(format!(
            "raster has {} cells, expected {n}",
            out.len()
        )));
    }
    Ok(out)
}

impl From<&Observation> for CompactObservation {
    fn from(o: &Observation) -> Self {
        CompactObservation {
            width: o.width,
            height: o.height,
            visible: o.visible.clone(),
            cells: rle(&o.cells),
            depth_mm: rle(&o.depth_mm),
            pose: o.pose.clone(),
            tick: o.tick,
        }
    }
}

impl CompactObservation {
    pub fn decode(&self) -> Result<Observation, ProtocolError> {
        let n = self.width as usize * self.height as usize;
        let cells = unrle(&self.cells, n)?;
        if let Some(bad) = cells.iter().find(|c| **c as usize > self.visible.len()) {
            return Err(ProtocolError::MalformedPayload(format!(
                "cell refers to visible #{bad}"
            )));
        }
        Ok(Observation {
            width: self.width,
            height: self.height,
            visible: self.visible.clone(),
            cells,
            depth_mm: unrle(&self.depth_mm, n)?,
            pose: self.pose.clone(),
            tick: self.tick,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceRequest {
    pub session_id: String,
    pub turn_index: u32,
    pub utterance: String,
    pub observation: CompactObservation,
    pub dialog_history: Vec<DialogTurn>,
    pub action_history: Vec<ActionRecord>,
    pub previous_response_id: Option<String>,
    pub scene_id: String,
    /// N-best recognizer hypotheses; informational only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    #[serde(default)]
    pub mode: InferenceMode,
}

impl InferenceRequest {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.utterance.trim().is_empty() {
            return Err(ProtocolError::MalformedPayload("empty utterance".into()));
        }
        if self
            .action_history
            .windows(2)
            .any(|w| w[0].turn_index > w[1].turn_index)
            || self
                .action_history
                .last()
                .is_some_and(|a| a.turn_index > self.turn_index)
        {
            return Err(ProtocolError::MalformedPayload(
                "action history out of order".into(),
            ));
        }
        self.observation.decode()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceResponse {
    pub response_id: String,
    pub actions: Vec<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialog: Option<String>,
    pub turn_complete: bool,
}

impl InferenceResponse {
    pub fn act(response_id: impl Into<String>, actions: Vec<Action>) -> Self {
        Self {
            response_id: response_id.into(),
            actions,
            dialog: None,
            turn_complete: false,
        }
    }

    pub fn finish(response_id: impl Into<String>, dialog: Option<String>) -> Self {
        Self {
            response_id: response_id.into(),
            actions: Vec::new(),
            dialog,
            turn_complete: true,
        }
    }

    /// A response either continues acting (actions, no dialog) or ends the
    /// turn (no actions, optional dialog).
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.actions.len() > MAX_ACTIONS_PER_RESPONSE {
            return Err(ProtocolError::MalformedPayload(format!(
                "{} actions exceed the limit of {MAX_ACTIONS_PER_RESPONSE}",
                self.actions.len()
            )));
        }
        let continuing = !self.actions.is_empty() && self.dialog.is_none();
        if self.turn_complete == continuing {
            return Err(ProtocolError::MalformedPayload(
                "response must either end the turn or carry actions without dialog".into(),
            ));
        }
        if self.turn_complete && !self.actions.is_empty() {
            return Err(ProtocolError::MalformedPayload(
                "completed turn carries actions".into(),
            ));
        }
        Ok(())
    }

    /// Whether executing this response ends the turn.
    pub fn ends_turn(&self) -> bool {
        self.turn_complete || self.actions.iter().any(|a| matches!(a, Action::Stop))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Request,
    Response,
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema: &'static str,
    kind: Kind,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    Request(Box<InferenceRequest>),
    Response(InferenceResponse),
}

pub fn request_to_json(req: &InferenceRequest) -> String {
    serde_json::to_string(&Envelope {
        schema: PROTOCOL_SCHEMA,
        kind: Kind::Request,
        body: req,
    })
    .expect("request serializes")
}

pub fn response_to_json(resp: &InferenceResponse) -> String {
    serde_json::to_string(&Envelope {
        schema: PROTOCOL_SCHEMA,
        kind: Kind::Response,
        body: resp,
    })
    .expect("response serializes")
}

/// Parses and validates a wire document. Unknown fields are ignored.
pub fn parse_wire(bytes: &[u8]) -> Result<WireMessage, ProtocolError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| ProtocolError::MalformedPayload(e.to_string()))?;
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ProtocolError::MalformedPayload(e.to_string()))?;
    let schema = value
        .get("schema")
        .and_then(|s| s.as_str())
        .ok_or_else(|| ProtocolError::MalformedPayload("missing schema".into()))?;
    if schema != PROTOCOL_SCHEMA {
        return Err(ProtocolError::SchemaVersionUnsupported(schema.to_string()));
    }
    let kind: Kind = value
        .get("kind")
        .cloned()
        .ok_or_else(|| ProtocolError::MalformedPayload("missing kind".into()))
        .and_then(|k| {
            serde_json::from_value(k).map_err(|e| ProtocolError::MalformedPayload(e.to_string()))
        })?;
    let malformed = |e: serde_json::Error| ProtocolError::MalformedPayload(e.to_string());
    match kind {
        Kind::Request => {
            let req: InferenceRequest = serde_json::from_value(value).map_err(malformed)?;
            req.validate()?;
            Ok(WireMessage::Request(Box::new(req)))
        }
        Kind::Response => {
            let resp: InferenceResponse = serde_json::from_value(value).map_err(malformed)?;
            resp.validate()?;
            Ok(WireMessage::Response(resp))
        }
    }
}

pub fn parse_request(bytes: &[u8]) -> Result<InferenceRequest, ProtocolError> {
    match parse_wire(bytes)? {
        WireMessage::Request(r) => Ok(*r),
        WireMessage::Response(_) => {
            Err(ProtocolError::MalformedPayload("expected a request".into()))
        }
    }
}

pub fn parse_response(bytes: &[u8]) -> Result<InferenceResponse, ProtocolError> {
    match parse_wire(bytes)? {
        WireMessage::Response(r) => Ok(r),
        WireMessage::Request(_) => Err(ProtocolError::MalformedPayload(
            "expected a response".into(),
        )),
    }
}
