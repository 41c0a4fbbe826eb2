use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("domain extent must be positive and finite, got {0}")]
    BadExtent(f64),

    #[error("field has {got} values but its grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("derivative order {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedOrder(usize),

    #[error("{0} requires a truncated-line grid")]
    NeedsLine(&'static str),

    #[error("spectral division is only available on periodic grids")]
    SpectralOnLine,

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} exceeds the advisory CFL limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("time {0} lies outside the range covered by the trajectory")]
    OutOfRange(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
