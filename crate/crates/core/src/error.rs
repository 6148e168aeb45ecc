use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwapError {
    #[error("antisymmetric Bell state with identical modes {0} vanishes")]
    VanishingState(i32),

    #[error("paths must be distinct")]
    RepeatedPath,

    #[error("states occupy overlapping paths: {0}")]
    OverlappingPaths(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("no photon in path {0}")]
    MissingPhoton(&'static str),

    #[error("post-selected component has zero norm: {0}")]
    ZeroAmplitude(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SwapError>;
