use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Solver outcomes such as infeasibility or hitting a time limit are normally
/// reported through [`crate::solve::SolveStatus`]; they only become an
/// `Error` when an operation cannot produce its result without them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    #[error("limit reached before a result was available: {0}")]
    LimitReached(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("enumeration too large: C({m}, {k}) = {count} exceeds limit {limit}")]
    TooLarge {
        m: usize,
        k: usize,
        count: u128,
        limit: u128,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
