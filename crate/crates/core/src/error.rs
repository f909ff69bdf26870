use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("gradient tape does not match the model or upstream shapes")]
    StaleTape,

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("insufficient samples: have {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("target MI {target} is below the Student correction term {correction}")]
    TargetBelowCorrection { target: f64, correction: f64 },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
