use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Type-set generation ran out of attempts before reaching the requested count.
    #[error(
        "type generation achieved {achieved} of {requested} types with min distance {min_distance} \
         after {attempts} attempts"
    )]
    Generation {
        achieved: usize,
        requested: usize,
        min_distance: f64,
        attempts: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("attractiveness map has not been primed")]
    Unprimed,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("determinism fault for seed {seed}: {detail}")]
    Determinism { seed: u64, detail: String },

    #[error("internal failure: {0}")]
    Internal(String),

    #[error("malformed data in {source_name}: {detail}")]
    Parse { source_name: String, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            detail: detail.into(),
        }
    }
}
