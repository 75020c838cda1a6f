use std::path::PathBuf;
use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("nonpositive cell at (row {row}, column {col})")]
    NonPositiveCell { row: String, col: String },

    #[error("power parameter must be positive, got {0}")]
    InvalidPower(f64),

    #[error("invalid margin targets: {0}")]
    InvalidTargets(String),

    #[error("margin fit did not converge after {iterations} sweeps (max margin error {achieved:.3e}); the zero pattern may make the targets infeasible")]
    NonConvergence { iterations: usize, achieved: f64 },

    #[error("requested {requested} axes but at most {available} are available")]
    TooManyAxes { requested: usize, available: usize },

    #[error("exhaustive sign enumeration limited to min(I,J) <= {limit}, table has min dimension {dim}; use the iterative strategy")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("axis {axis} was not extracted (decomposition has {available} axes)")]
    MissingAxis { axis: usize, available: usize },

    #[error("unknown dataset '{0}'")]
    UnknownDataset(String),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 0 is success, parse failures are 2,
    /// validation failures 3, nonconvergence 4, i/o 5.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::UnknownDataset(_) | Error::UnknownMethod(_) => 2,
            Error::NonConvergence { .. } => 4,
            Error::Io { .. } => 5,
            _ => 3,
        }
    }
}
