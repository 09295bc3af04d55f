use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("the no-arc relation is not an equivalence")]
    NotAnEquivalence,
    #[error("size {size} exceeds the enumeration bound {bound}")]
    BoundExceeded { size: usize, bound: usize },
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("invalid embedding: {0}")]
    Embedding(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("not a congruence: {0}")]
    NotACongruence(String),
    #[error("signature clash: {0}")]
    Signature(String),
    #[error("measure has no entry for {0}")]
    IncompleteMeasure(String),
    #[error("witness does not extend the projected maps: {0}")]
    WitnessMismatch(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("certificate step {index} is broken: {reason}")]
    Step { index: usize, reason: String },
    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
