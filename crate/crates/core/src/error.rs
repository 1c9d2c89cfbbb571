use thiserror::Error;

/// Errors raised by configuration, simulation and rate evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("invalid demand: {0}")]
    Demand(String),
    #[error("file size not divisible: {0}")]
    Divisibility(String),
    #[error("mirror {mirror} cannot reconstruct {what}")]
    Reconstruct { mirror: usize, what: String },
    #[error("user {user} cannot decode {what}")]
    Decode { user: usize, what: String },
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("target outside hull: {0}")]
    Hull(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("out of scope: {0}")]
    Scope(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
