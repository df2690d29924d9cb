use thiserror::Error;

use crate::game::StateKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed state {key}: {reason}")]
    MalformedState { key: StateKey, reason: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unrecognised {kind} `{token}`: {reason}")]
    Usage {
        kind: &'static str,
        token: String,
        reason: String,
    },

    #[error("capacity exceeded: reached {reached} states (cap {cap})")]
    Capacity { reached: usize, cap: usize },

    #[error("state {0} is present in the table but unreachable according to the oracle")]
    Reachability(StateKey),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn malformed(key: &StateKey, reason: impl Into<String>) -> Self {
        Error::MalformedState {
            key: key.clone(),
            reason: reason.into(),
        }
    }

    pub(crate) fn usage(kind: &'static str, token: &str, reason: impl Into<String>) -> Self {
        Error::Usage {
            kind,
            token: token.to_string(),
            reason: reason.into(),
        }
    }
}
