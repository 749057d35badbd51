use thiserror::Error;

/// Errors produced by the team-game toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid probability vector: {0}")]
    InvalidPolicy(String),

    /// A policy representation cannot express the requested team policy
    /// (e.g. a shared policy for teammates with different action counts).
    #[error("representation error: {0}")]
    Representation(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("expected {expected} payoff entries, found {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("duplicate action label `{label}` for player {player} of team {team}")]
    DuplicateLabel {
        team: usize,
        player: usize,
        label: String,
    },

    #[error("non-finite payoff at entry {index}")]
    NonFinite { index: usize },

    #[error("game too large for full enumeration: {cells} cells exceeds {limit}")]
    SizeGuard { cells: usize, limit: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration {requested} out of range (trace has {available})")]
    IterationOutOfRange { requested: usize, available: usize },

    #[error("trace has no recorded trajectory data")]
    MissingTrajectory,
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
