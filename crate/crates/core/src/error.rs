use thiserror::Error;

/// Errors raised across the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time {t} outside the shape horizon [0, {horizon}]")]
    TimeOutOfHorizon { t: f64, horizon: f64 },

    #[error("point is {distance:e} away from the interface (tolerance {tolerance:e})")]
    OffInterface { distance: f64, tolerance: f64 },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("non-finite value in layer {layer}")]
    NonFiniteLayer { layer: usize },

    #[error("non-finite loss term `{term}` at step {step}")]
    NonFiniteLoss { term: &'static str, step: usize },

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("unknown problem `{name}`; valid names: {valid}")]
    UnknownProblem { name: String, valid: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteLayer { .. } | Error::NonFiniteLoss { .. } | Error::Metric(_) => 2,
            Error::CheckFailed(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
