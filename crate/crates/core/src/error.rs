use std::fmt;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum KgError {
    #[error("subclass cycle through `{0}`")]
    Cycle(String),

    #[error("dangling reference to unknown id `{id}` ({context})")]
    DanglingRef { id: String, context: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("unknown prefix `{prefix}:` at line {line}, column {col}")]
    UnknownPrefix {
        prefix: String,
        line: usize,
        col: usize,
    },

    #[error("graph `{0}` has no entity type with properties")]
    EmptyGraph(String),

    #[error("entity type `{0}` has no properties")]
    EmptyPropertySet(String),

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("feature layout mismatch: model expects {expected}, got {found}")]
    LayoutMismatch { expected: String, found: String },

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("no similarity entry for pair ({0}, {1})")]
    MissingSim(String, String),

    #[error("lotus statistics support 2 to 5 sets, got {0}")]
    TooManySets(usize),

    #[error("id conflict on `{id}`: reference label `{reference}` differs from candidate label `{candidate}`")]
    Conflict {
        id: String,
        reference: String,
        candidate: String,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl KgError {
    pub fn parse(line: usize, col: usize, message: impl fmt::Display) -> Self {
        KgError::Parse {
            line,
            col,
            message: message.to_string(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl fmt::Display) -> Self {
        KgError::Config {
            key: key.into(),
            message: message.to_string(),
        }
    }

    /// Whether the error stems from user input (exit code 1) rather than an
    /// internal failure (exit code 2).
    pub fn is_validation(&self) -> bool {
        !matches!(self, KgError::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, KgError>;
