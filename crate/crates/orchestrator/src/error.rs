use arena_core::{ArenaError, MissionError};
use arena_edh::EdhError;
use arena_metrics::MetricsError;
use thiserror::Error;

use crate::session::SessionStatus;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("mission {0} not found")]
    MissionNotFound(String),
    #[error("session capacity of {0} reached")]
    CapacityExceeded(usize),
    #[error("session {0} not found")]
    SessionNotFound(String),
    #[error("unknown team {0}")]
    UnknownTeam(String),
    #[error("a turn is already in flight for this session")]
    TurnInFlight,
    #[error("session is {0:?}")]
    SessionNotActive(SessionStatus),
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("rating already submitted")]
    RatingAlreadySubmitted,
    #[error("score {0} outside 1-5")]
    ScoreOutOfRange(i64),
    #[error("session is {0:?} and cannot be rated")]
    SessionNotRatable(SessionStatus),
    #[error("session is still active")]
    SessionActive,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Edh(#[from] EdhError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl OrchestratorError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MissionNotFound(_) => "mission_not_found",
            Self::CapacityExceeded(_) => "capacity_exceeded",
            Self::SessionNotFound(_) => "session_not_found",
            Self::UnknownTeam(_) => "unknown_team",
            Self::TurnInFlight => "turn_in_flight",
            Self::SessionNotActive(_) => "session_not_active",
            Self::EmptyUtterance => "empty_utterance",
            Self::RatingAlreadySubmitted => "rating_already_submitted",
            Self::ScoreOutOfRange(_) => "score_out_of_range",
            Self::SessionNotRatable(_) => "session_not_ratable",
            Self::SessionActive => "session_active",
            Self::Config(_) => "config",
            Self::Mission(_)
            | Self::Arena(_)
            | Self::Edh(_)
            | Self::Metrics(_)
            | Self::Json(_)
            | Self::Io(_) => "internal",
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            Self::MissionNotFound(_) | Self::SessionNotFound(_) | Self::UnknownTeam(_) => 404,
            Self::CapacityExceeded(_) => 503,
            Self::TurnInFlight
            | Self::SessionNotActive(_)
            | Self::RatingAlreadySubmitted
            | Self::SessionNotRatable(_)
            | Self::SessionActive => 409,
            Self::EmptyUtterance => 400,
            Self::ScoreOutOfRange(_) => 422,
            _ => 500,
        }
    }
}
