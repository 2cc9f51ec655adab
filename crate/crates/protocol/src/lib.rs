//! Action-inference protocol.
//!
//! The orchestrator sends an [`InferenceRequest`] carrying the utterance, the
//! current observation and the session histories; the service answers with
//! an [`InferenceResponse`] that either continues acting or ends the turn.
//! The crate also ships the rule-based [`Baseline`] agent, an axum service
//! wrapper and HTTP/in-process clients.

pub mod approach;
pub mod baseline;
pub mod client;
pub mod grammar;
pub mod lexicon;
pub mod memory;
pub mod service;
pub mod wire;

pub use baseline::{
    baseline_infer, Baseline, Belief, SceneContext, FALLBACK_DIALOG, MAX_RESPONSES_PER_TURN,
};
pub use client::{ClientError, HttpInferenceClient, InferenceClient, LocalInferenceClient};
pub use lexicon::{Command, GroundingLexicon};
pub use memory::{update_visual_memory, Sighting, VisualMemory};
pub use service::{router, router_with_deadline, serve, InferenceHandler, INFERENCE_DEADLINE};
pub use wire::{
    parse_request, parse_response, parse_wire, request_to_json, response_to_json, ActionRecord,
    CompactObservation, DialogTurn, InferenceMode, InferenceRequest, InferenceResponse,
    ProtocolError, Speaker, WireMessage, MAX_ACTIONS_PER_RESPONSE, PROTOCOL_SCHEMA,
};
