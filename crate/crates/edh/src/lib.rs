//! Execution-from-dialog-history evaluation: session logs, instance
//! extraction, model runs and suite reports.

pub mod error;
pub mod instance;
pub mod log;
pub mod model;
pub mod run;
pub mod suite;

pub use error::EdhError;
pub use instance::{
    extract_dir, extract_edh_instances, task_relevant, Budget, EdhInstance, EdhSuite, PastAction,
    Utterance, MAX_ACTIONS, MAX_API_FAILURES, SUITE_SCHEMA,
};
pub use log::{
    replay, replay_trace, result_digest, LogEvent, LogRecorder, ReplayTrace, SessionLog, Speaker,
    SESSION_LOG_SCHEMA,
};
pub use model::{
    builtin, EdhView, Model, ModelAdapter, ModelError, OracleModel, ProtocolModel, RepeatModel,
    ScriptModel, BUILTIN_MODELS,
};
pub use run::{run_edh, EdhResult, PredictedAction, Termination};
pub use suite::{evaluate_suite, EdhReport, REPORT_SCHEMA};
