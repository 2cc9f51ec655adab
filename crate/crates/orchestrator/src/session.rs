//! Session records and their on-disk persistence.

use std::path::{Path, PathBuf};

use arena_core::{Action, ActionResult, MissionSpec, MissionStatus, WorldSnapshot};
use arena_edh::SessionLog;
use arena_protocol::{ActionRecord, DialogTurn, InferenceResponse};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::OrchestratorError;

pub const RATING_PROMPT: &str = "How would you rate your interaction with the robot?";
pub const TIMEOUT_DIALOG: &str = "Sorry, I'm taking too long to think. Could you say that again?";
pub const PROTOCOL_ERROR_DIALOG: &str =
    "Sorry, something went wrong on my side. Could you say that again?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    MissionComplete,
    Abandoned,
    Ended,
}

impl SessionStatus {
    pub fn ratable(self) -> bool {
        matches!(self, SessionStatus::MissionComplete | SessionStatus::Ended)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub score: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRoundTrip {
    /// SHA-256 of the request's JSON.
    pub request_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<InferenceResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedAction {
    pub action: Action,
    pub result: ActionResult,
}

/// Why a turn ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnOutcome {
    TurnComplete,
    StopAction,
    MissionComplete,
    ActionLimit,
    FailureLimit,
    RoundLimit,
    InferenceTimeout,
    InferenceProtocolError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn_index: u32,
    pub utterance: String,
    pub round_trips: Vec<InferenceRoundTrip>,
    pub executed: Vec<ExecutedAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot_dialog: Option<String>,
    pub outcome: TurnOutcome,
    pub mission_status_after: MissionStatus,
    pub wall_time_ms: u64,
}

impl TurnRecord {
    pub fn failures(&self) -> usize {
        self.executed.iter().filter(|e| !e.result.ok).count()
    }
}

/// Everything needed to resume a session after a restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionData {
    pub session_id: String,
    pub team_id: String,
    pub mission: MissionSpec,
    pub status: SessionStatus,
    pub world: WorldSnapshot,
    pub mission_status: MissionStatus,
    pub turns: Vec<TurnRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<Rating>,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended_at: Option<DateTime<Utc>>,
    pub last_activity: DateTime<Utc>,
    /// Set once the session's metrics record has been written.
    pub finalized: bool,
    pub dialog: Vec<DialogTurn>,
    pub history: Vec<ActionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous_response_id: Option<String>,
    pub log: SessionLog,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalView {
    pub description: String,
    pub complete: bool,
}

/// What the console shows; never sent to the inference service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub team_id: String,
    pub mission_id: String,
    pub title: String,
    pub user_briefing: String,
    pub subgoals: Vec<SubgoalView>,
    pub status: SessionStatus,
    pub turns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<Rating>,
    pub rating_prompt: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended_at: Option<DateTime<Utc>>,
}

impl SessionData {
    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.session_id.clone(),
            team_id: self.team_id.clone(),
            mission_id: self.mission.mission_id.clone(),
            title: self.mission.title.clone(),
            user_briefing: self.mission.user_briefing.clone(),
            subgoals: self
                .mission
                .subgoals
                .iter()
                .zip(&self.mission_status.subgoals)
                .map(|(s, done)| SubgoalView {
                    description: s.description.clone(),
                    complete: *done,
                })
                .collect(),
            status: self.status,
            turns: self.turns.len(),
            rating: self.rating.clone(),
            rating_prompt: RATING_PROMPT.to_string(),
            created_at: self.created_at,
            ended_at: self.ended_at,
        }
    }
}

/// One JSON file per session, replaced atomically on every save.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, OrchestratorError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn save(&self, data: &SessionData) -> Result<(), OrchestratorError> {
        let tmp = self.dir.join(format!(".{}.tmp", data.session_id));
        std::fs::write(&tmp, serde_json::to_vec(data)?)?;
        std::fs::rename(&tmp, self.path(&data.session_id))?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<SessionData, OrchestratorError> {
        Ok(serde_json::from_slice(&std::fs::read(self.path(id))?)?)
    }

    /// All saved sessions, ordered by id.
    pub fn load_all(&self) -> Result<Vec<SessionData>, OrchestratorError> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| Ok(serde_json::from_slice(&std::fs::read(p)?)?))
            .collect()
    }
}
