use thiserror::Error;

/// Errors raised by the path solver, the path metrics and the inference layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocoError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("index {index} out of range for {len} covariates")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
    #[error("invalid norm exponent: {0}")]
    InvalidNorm(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
}

pub type Result<T> = std::result::Result<T, LocoError>;
