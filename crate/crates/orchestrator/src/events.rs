//! Events streamed to session subscribers as newline-delimited JSON.

use std::collections::BTreeMap;

use arena_core::{InstanceId, Observation};
use arena_protocol::CompactObservation;
use serde::{Deserialize, Serialize};

pub const HIGHLIGHT_DURATION_MS: u64 = 1500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// `snapshot` frames are sent to new subscribers and repeat the current
    /// view; they do not correspond to an executed action.
    Frame {
        snapshot: bool,
        observation: CompactObservation,
        /// Instance id to class name for every visible object.
        legend: BTreeMap<InstanceId, String>,
    },
    RobotDialog {
        text: String,
    },
    Highlight {
        instance: InstanceId,
        duration_ms: u64,
    },
    SubgoalComplete {
        index: usize,
    },
    MissionComplete,
    TurnEnded {
        turn_index: u32,
    },
    MicOpen,
}

impl Event {
    pub fn frame(obs: &Observation, snapshot: bool) -> Self {
        Event::Frame {
            snapshot,
            legend: obs
                .visible
                .iter()
                .map(|v| (v.id.clone(), v.class.clone()))
                .collect(),
            observation: CompactObservation::from(obs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventEnvelope {
    /// Position in the session's stream; absent on snapshot frames.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    pub session_id: String,
    #[serde(flatten)]
    pub event: Event,
}

impl EventEnvelope {
    pub fn to_ndjson(&self) -> String {
        let mut s = serde_json::to_string(self).expect("event serializes");
        s.push('\n');
        s
    }
}

pub fn parse_ndjson(text: &str) -> Result<Vec<EventEnvelope>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
