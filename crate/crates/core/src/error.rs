use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown potential `{0}`")]
    UnknownPotential(String),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("chain {chain} diverged at step {step}")]
    ChainDiverged {
        chain: u64,
        step: u64,
        position: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
