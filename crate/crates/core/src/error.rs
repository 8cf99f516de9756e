use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid landscape spec: {0}")]
    InvalidSpec(String),

    #[error("landscape is overconstrained: {0}")]
    Overconstrained(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} lies outside [0, {boundary}]")]
    OutOfDomain {
        index: usize,
        value: f64,
        boundary: f64,
    },

    #[error("fitness {0} is outside [0, 1]")]
    FitnessOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("budget of {budget} evaluations cannot fit one iteration ({required} required)")]
    BudgetTooSmall { budget: usize, required: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("race cannot start: {0}")]
    Race(String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("missing summaries: {0}")]
    MissingSummaries(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
