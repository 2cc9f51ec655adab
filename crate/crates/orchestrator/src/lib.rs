//! Live game sessions: a user instructs the robot turn by turn, the
//! orchestrator calls the inference service, executes the returned actions,
//! streams frames and checks mission goals after every action.

pub mod api;
pub mod config;
pub mod error;
pub mod events;
pub mod orchestrator;
pub mod session;

pub use api::{router, serve, NDJSON};
pub use config::{Config, TeamConfig, TurnLimits, LOCAL_ENDPOINT};
pub use error::OrchestratorError;
pub use events::{parse_ndjson, Event, EventEnvelope, HIGHLIGHT_DURATION_MS};
pub use orchestrator::{
    Clock, MissionSummary, Orchestrator, OrchestratorBuilder, SessionCreated, StreamItem,
    Subscription,
};
pub use session::{
    ExecutedAction, InferenceRoundTrip, Rating, SessionData, SessionStatus, SessionStore,
    SessionView, SubgoalView, TurnOutcome, TurnRecord, PROTOCOL_ERROR_DIALOG, RATING_PROMPT,
    TIMEOUT_DIALOG,
};
