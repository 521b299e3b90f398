use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error kinds shared by every module. The server maps them onto status
/// codes (`Conflict` → 409, `Validation`/`InvalidArgument` → 400, ...).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed: {}", display_violations(.0))]
    Validation(Vec<Violation>),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("state violation: {0}")]
    StateViolation(String),

    #[error("assignment violation: annotator {annotator:?} already used on sample {sample_id:?}")]
    AssignmentViolation {
        sample_id: String,
        annotator: String,
    },

    #[error("annotator pool exhausted for sample {0:?}")]
    PoolExhausted(String),

    #[error("invalid pair: {0}")]
    InvalidPair(String),

    #[error("unmatched form: {0:?} does not occur as a whole token")]
    UnmatchedForm(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("model client failed: {0}")]
    Client(#[from] ClientError),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind, used in JSON error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Validation(_) => "validation",
            Error::Conflict(_) => "conflict",
            Error::StateViolation(_) => "state_violation",
            Error::AssignmentViolation { .. } => "assignment_violation",
            Error::PoolExhausted(_) => "pool_exhausted",
            Error::InvalidPair(_) => "invalid_pair",
            Error::UnmatchedForm(_) => "unmatched_form",
            Error::NotFound(_) => "not_found",
            Error::Client(_) => "client_error",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::Validation(v) => v,
            _ => &[],
        }
    }
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Failure talking to an external model (captioner, detector, embedder,
/// generator, chooser).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server returned status {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
}

pub(crate) fn check(violations: Vec<Violation>) -> Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations))
    }
}
