use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not unitary (residual {residual:.3e} exceeds {tolerance:.3e})")]
    NotUnitary { residual: f64, tolerance: f64 },
    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("rotation indices must satisfy i < j (got i={i}, j={j})")]
    BadIndexOrder { i: usize, j: usize },
    #[error("at least 2 qubits required, got {0}")]
    TooFewQubits(usize),
    #[error("Meyer-Wallach Q needs at least 2 qubits")]
    SingleQubit,
    #[error("baker's map needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("empty sample")]
    EmptySample,
    #[error("reference library has no {0} distributions")]
    MissingReferenceKind(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
