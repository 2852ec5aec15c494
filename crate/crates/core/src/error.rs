use thiserror::Error;

/// Errors raised by the time-frequency calculus.
#[derive(Debug, Error)]
pub enum TfqError {
    #[error("grid size must be at least 2 (got {0})")]
    InvalidGrid(usize),

    #[error("lattice must divide grid")]
    LatticeMismatch,

    #[error("table weight requires grid point")]
    TableWeightOffGrid,

    #[error("ℬ_τ/𝒰_τ singular at endpoints")]
    SingularEndpoint,

    #[error("quantization parameter out of range")]
    TauOutOfRange,

    #[error("window must be non-zero")]
    ZeroWindow,

    #[error("frame operator singular")]
    FrameSingular,

    #[error("full channel matrix too large; use a lattice")]
    ChannelTooLarge,

    #[error("use weak form at endpoints")]
    WeakFormRequired,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid exponent {0}; mixed norms need p, q >= 1")]
    InvalidExponent(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, TfqError>;

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(TfqError::TauOutOfRange)
    }
}
