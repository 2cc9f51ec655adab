//! Session logs: the initial state reference plus every utterance and
//! executed action, chained by post-action state hashes.

use std::path::Path;

use arena_core::hash::sha256_hex;
use arena_core::{
    apply_action, instantiate_with_overrides, state_hash, Action, ActionResult, MissionSpec,
    SceneLibrary, StateHash, StateOverride, WorldState,
};
use serde::{Deserialize, Serialize};

use crate::error::EdhError;

pub const SESSION_LOG_SCHEMA: &str = "arena-session-log/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Commander,
    Follower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogEvent {
    Utterance {
        speaker: Speaker,
        text: String,
    },
    Action {
        action: Action,
        ok: bool,
        /// SHA-256 of the canonical JSON of the action result.
        result_digest: String,
        post_hash: StateHash,
    },
}

impl LogEvent {
    pub fn is_utterance(&self) -> bool {
        matches!(self, LogEvent::Utterance { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub schema: String,
    pub session_id: String,
    pub scene_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<StateOverride>,
    /// The mission played, when there was one; its goal objects define
    /// task relevance during extraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mission: Option<MissionSpec>,
    pub initial_hash: StateHash,
    pub events: Vec<LogEvent>,
    pub recorded_final_hash: StateHash,
}

pub fn result_digest(result: &ActionResult) -> String {
    sha256_hex(&serde_json::to_vec(result).expect("result serializes"))
}

impl SessionLog {
    pub fn from_json(text: &str) -> Result<Self, EdhError> {
        let log: SessionLog = serde_json::from_str(text)?;
        if log.schema != SESSION_LOG_SCHEMA {
            return Err(EdhError::Schema(log.schema));
        }
        Ok(log)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EdhError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical bytes: pretty JSON in declaration order with a trailing
    /// newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("log serializes");
        s.push('\n');
        s
    }

    pub fn initial_state(&self, library: &SceneLibrary) -> Result<WorldState, EdhError> {
        let state = instantiate_with_overrides(library, &self.scene_id, &self.overrides)?;
        if state_hash(&state) != self.initial_hash {
            return Err(EdhError::InitialStateMismatch);
        }
        Ok(state)
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.events.iter().filter_map(|e| match e {
            LogEvent::Action { action, .. } => Some(action),
            LogEvent::Utterance { .. } => None,
        })
    }
}

/// State before each event and after the last, checked against the chain.
pub struct ReplayTrace {
    /// `states[i]` is the state before event `i`; the last entry is final.
    pub states: Vec<WorldState>,
    pub results: Vec<Option<ActionResult>>,
}

/// Replays every action and checks each post-state hash, each result
/// digest and the final hash.
pub fn replay_trace(log: &SessionLog, library: &SceneLibrary) -> Result<ReplayTrace, EdhError> {
    let mut state = log.initial_state(library)?;
    let mut states = Vec::with_capacity(log.events.len() + 1);
    let mut results = Vec::with_capacity(log.events.len());
    for (i, event) in log.events.iter().enumerate() {
        states.push(state.clone());
        match event {
            LogEvent::Utterance { .. } => results.push(None),
            LogEvent::Action {
                action,
                ok,
                result_digest: digest,
                post_hash,
            } => {
                let (next, result) = apply_action(&state, action);
                if result.ok != *ok
                    || &result_digest(&result) != digest
                    || &state_hash(&next) != post_hash
                {
                    return Err(EdhError::HashChainBroken(i));
                }
                state = next;
                results.push(Some(result));
            }
        }
    }
    if state_hash(&state) != log.recorded_final_hash {
        return Err(EdhError::HashChainBroken(log.events.len()));
    }
    states.push(state);
    Ok(ReplayTrace { states, results })
}

pub fn replay(log: &SessionLog, library: &SceneLibrary) -> Result<WorldState, EdhError> {
    Ok(replay_trace(log, library)?
        .states
        .pop()
        .expect("final state"))
}

/// Builds a log while a session runs.
#[derive(Debug, Clone)]
pub struct LogRecorder {
    log: SessionLog,
}

impl LogRecorder {
    pub fn new(
        session_id: impl Into<String>,
        initial: &WorldState,
        overrides: Vec<StateOverride>,
        mission: Option<MissionSpec>,
    ) -> Self {
        let hash = state_hash(initial);
        Self {
            log: SessionLog {
                schema: SESSION_LOG_SCHEMA.into(),
                session_id: session_id.into(),
                scene_id: initial.scene_id().to_string(),
                overrides,
                mission,
                initial_hash: hash.clone(),
                events: Vec::new(),
                recorded_final_hash: hash,
            },
        }
    }

    pub fn for_mission(
        session_id: impl Into<String>,
        initial: &WorldState,
        mission: &MissionSpec,
    ) -> Self {
        Self::new(
            session_id,
            initial,
            mission.scene_overrides.clone(),
            Some(mission.clone()),
        )
    }

    /// Continues recording onto an existing log.
    pub fn resume(log: SessionLog) -> Self {
        Self { log }
    }

    pub fn utterance(&mut self, speaker: Speaker, text: impl Into<String>) {
        self.log.events.push(LogEvent::Utterance {
            speaker,
            text: text.into(),
        });
    }

    pub fn action(&mut self, action: &Action, result: &ActionResult, post: &WorldState) {
        let post_hash = state_hash(post);
        self.log.events.push(LogEvent::Action {
            action: action.clone(),
            ok: result.ok,
            result_digest: result_digest(result),
            post_hash: post_hash.clone(),
        });
        self.log.recorded_final_hash = post_hash;
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn finish(self) -> SessionLog {
        self.log
    }
}
