use thiserror::Error;

/// Errors raised by the interpolation machinery, the game model and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: bounds must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point {value} lies outside [-1, 1] beyond the clamp tolerance")]
    OutOfDomain { value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("gather index does not match the stack layout")]
    StaleGather,

    #[error("flat index overflow for layout {0:?}")]
    IndexOverflow(Vec<usize>),

    #[error("invalid game specification: {0}")]
    InvalidSpec(String),

    #[error("block count {blocks} does not divide node count {nodes}")]
    NotADivisor { nodes: usize, blocks: usize },

    #[error("horizon {horizon} exceeds path length {len}")]
    HorizonTooLong { horizon: usize, len: usize },

    #[error("oracle did not converge within {0} iterations")]
    OracleNotConverged(usize),

    #[error("oracle stage game is singular")]
    OracleSingular,

    #[error("oracle feedback hits the u >= 0 constraint at {fraction:.3} of grid nodes")]
    ConstraintActive { fraction: f64 },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
