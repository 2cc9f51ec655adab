//! Extraction of EDH instances from session logs.
//!
//! Utterances split a log into segments: the actions before the first
//! utterance, then the actions between each consecutive pair. Actions after
//! the last utterance are not bracketed and never form an instance. A
//! segment becomes an instance when the dialog before it is non-empty, it
//! contains an object interaction, and it changes a task-relevant object.

use std::collections::BTreeSet;
use std::path::Path;

use arena_core::hash::sha256_hex;
use arena_core::{diff_states, Action, InstanceId, SceneLibrary, StateDelta, WorldSnapshot};
use serde::{Deserialize, Serialize};

use crate::error::EdhError;
use crate::log::{replay_trace, LogEvent, ReplayTrace, SessionLog, Speaker};

pub const SUITE_SCHEMA: &str = "arena-edh-suite/1";
pub const MAX_ACTIONS: u32 = 1000;
pub const MAX_API_FAILURES: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_actions: u32,
    pub max_api_failures: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_actions: MAX_ACTIONS,
            max_api_failures: MAX_API_FAILURES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PastAction {
    pub action: Action,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdhInstance {
    pub instance_id: String,
    pub session_id: String,
    /// Index of the segment within its log.
    pub segment: usize,
    pub dialog_history: Vec<Utterance>,
    pub action_history: Vec<PastAction>,
    pub expected_changes: StateDelta,
    pub budget: Budget,
    pub initial_state: WorldSnapshot,
    /// The logged follower actions for this segment.
    pub reference_actions: Vec<Action>,
}

#[derive(Serialize)]
struct IdSource<'a> {
    session_id: &'a str,
    segment: usize,
    dialog_history: &'a [Utterance],
    action_history: &'a [PastAction],
    expected_changes: &'a StateDelta,
    initial_state: &'a WorldSnapshot,
    reference_actions: &'a [Action],
}

impl EdhInstance {
    /// Content hash of everything but the id itself.
    pub fn content_id(&self) -> String {
        let src = IdSource {
            session_id: &self.session_id,
            segment: self.segment,
            dialog_history: &self.dialog_history,
            action_history: &self.action_history,
            expected_changes: &self.expected_changes,
            initial_state: &self.initial_state,
            reference_actions: &self.reference_actions,
        };
        let digest = sha256_hex(&serde_json::to_vec(&src).expect("instance serializes"));
        format!("edh-{}", &digest[..16])
    }
}

/// Objects whose changes count: those the mission's goals can refer to, or
/// without a mission every object the session changed.
pub fn task_relevant(
    log: &SessionLog,
    library: &SceneLibrary,
) -> Result<BTreeSet<InstanceId>, EdhError> {
    relevant_in(log, &replay_trace(log, library)?)
}

fn relevant_in(log: &SessionLog, trace: &ReplayTrace) -> Result<BTreeSet<InstanceId>, EdhError> {
    let initial = &trace.states[0];
    Ok(match &log.mission {
        Some(m) => m.task_relevant_instances(initial),
        None => {
            let last = trace.states.last().expect("final state");
            diff_states(initial, last)?
                .instances()
                .into_iter()
                .cloned()
                .collect()
        }
    })
}

pub fn extract_edh_instances(
    log: &SessionLog,
    library: &SceneLibrary,
) -> Result<Vec<EdhInstance>, EdhError> {
    let trace = replay_trace(log, library)?;
    let relevant = relevant_in(log, &trace)?;
    let mut boundaries = vec![0usize];
    boundaries.extend(
        log.events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_utterance())
            .map(|(i, _)| i),
    );
    boundaries.dedup();

    let mut out = Vec::new();
    for (segment, pair) in boundaries.windows(2).enumerate() {
        let (start, end) = (pair[0], pair[1]);
        let actions: Vec<Action> = log.events[start..end]
            .iter()
            .filter_map(|e| match e {
                LogEvent::Action { action, .. } => Some(action.clone()),
                LogEvent::Utterance { .. } => None,
            })
            .collect();
        let dialog_history: Vec<Utterance> = log.events[..=start]
            .iter()
            .filter_map(|e| match e {
                LogEvent::Utterance { speaker, text } => Some(Utterance {
                    speaker: *speaker,
                    text: text.clone(),
                }),
                LogEvent::Action { .. } => None,
            })
            .collect();
        if dialog_history.is_empty() || !actions.iter().any(Action::is_interaction) {
            continue;
        }
        let expected =
            diff_states(&trace.states[start], &trace.states[end])?.restrict_to(&relevant);
        if expected.is_empty() {
            continue;
        }
        let action_history = log.events[..start]
            .iter()
            .filter_map(|e| match e {
                LogEvent::Action { action, ok, .. } => Some(PastAction {
                    action: action.clone(),
                    ok: *ok,
                }),
                LogEvent::Utterance { .. } => None,
            })
            .collect();
        let mut inst = EdhInstance {
            instance_id: String::new(),
            session_id: log.session_id.clone(),
            segment,
            dialog_history,
            action_history,
            expected_changes: expected,
            budget: Budget::default(),
            initial_state: trace.states[start].snapshot(),
            reference_actions: actions,
        };
        inst.instance_id = inst.content_id();
        out.push(inst);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdhSuite {
    pub schema: String,
    pub instances: Vec<EdhInstance>,
}

impl EdhSuite {
    pub fn new(mut instances: Vec<EdhInstance>) -> Self {
        instances.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
        Self {
            schema: SUITE_SCHEMA.into(),
            instances,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EdhError> {
        let suite: EdhSuite = serde_json::from_str(text)?;
        if suite.schema != SUITE_SCHEMA {
            return Err(EdhError::Schema(suite.schema));
        }
        Ok(suite)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EdhError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("suite serializes");
        s.push('\n');
        s
    }
}

/// Extracts instances from every `*.json` session log in `dir`, in file
/// name order.
pub fn extract_dir(dir: impl AsRef<Path>, library: &SceneLibrary) -> Result<EdhSuite, EdhError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut all = Vec::new();
    for p in paths {
        all.extend(extract_edh_instances(&SessionLog::load(&p)?, library)?);
    }
    Ok(EdhSuite::new(all))
}
