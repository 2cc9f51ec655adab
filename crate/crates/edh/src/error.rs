use arena_core::{ArenaError, MissionError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdhError {
    /// Replay diverged from the log at this event index (the events length
    /// for the final hash).
    #[error("hash chain broken at event {0}")]
    HashChainBroken(usize),
    #[error("initial state does not match the log")]
    InitialStateMismatch,
    #[error("suite has no instances")]
    EmptySuite,
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("unknown builtin model {0:?}")]
    UnknownModel(String),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
