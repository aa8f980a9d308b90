//! Monte Carlo simulation of the key distribution protocol, with an optional
//! intercept-resend eavesdropper acting on Bob's photon.

mod config;
mod estimate;
mod jsonl;
mod session;
mod trial;

pub use config::{
    BellSettings, ProtocolConfig, SourceModel, DEFAULT_BELL_FRACTION, DEFAULT_DISCLOSE_FRACTION,
    DEFAULT_SEED,
};
pub use estimate::{
    bell_test, estimate_error, estimate_key_fraction, BellSummary, CellCheck, EmpiricalJoint,
    Estimate, MIN_BELL_ROUNDS,
};
pub use jsonl::{read_jsonl, write_jsonl};
pub use session::{run_session, Summary, Transcript};
pub use trial::{choose_variable, run_trial, BellKind, BellRecord, Role, TrialRecord};

use crate::analytics::AnalyticsError;
use crate::angmom::StateError;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("no disclosed key rounds to estimate from")]
    NoKeyRounds,
    #[error("only {counted} Bell rounds, need at least {required}")]
    InsufficientBellRounds { counted: u64, required: u64 },
    #[error("transcript format: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed transcript: {0}")]
    Malformed(String),
}
