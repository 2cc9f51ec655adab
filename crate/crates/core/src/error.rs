use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("decor licenses no action")]
    DecorHasNoAction,
    #[error("coordinate ({x}, {y}) outside {width}x{height} raster")]
    CoordinateOutOfBounds {
        x: i64,
        y: i64,
        width: u32,
        height: u32,
    },
    #[error("states belong to different scenes or instance sets")]
    SceneMismatch,
    #[error("invalid world state: {0}")]
    InvalidState(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ArenaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ArenaError::Io {
            path: path.into(),
            source,
        }
    }
}
