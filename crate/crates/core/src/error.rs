use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{st}, {et}]: start must be strictly before end")]
    InvalidInterval { st: i64, et: i64 },

    #[error("invalid value for {field}: {reason}")]
    InvalidValue { field: &'static str, reason: String },

    #[error("unknown service `{0}`")]
    UnknownService(String),

    #[error("unknown request `{0}`")]
    UnknownRequest(String),

    #[error("provider `{0}` has nothing to advertise: all wearables are empty")]
    NothingToAdvertise(String),

    #[error("no overlap: overlap duration must be positive, got {0}")]
    NoOverlap(i64),

    #[error("overlap {overlap} exceeds request duration {duration}")]
    OverlapExceedsRequest { overlap: i64, duration: i64 },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("satisfaction score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("summary statistics need at least one score")]
    EmptyScores,

    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),

    #[error("{path}: line {line}, field `{field}`: {reason}")]
    Csv {
        path: PathBuf,
        line: u64,
        field: String,
        reason: String,
    },

    #[error("{path}: schema error: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("{path}: duplicate id `{id}` on line {line}")]
    DuplicateId { path: PathBuf, id: String, line: u64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("dominance check failed: {0}")]
    CheckFailed(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    CsvLib(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
