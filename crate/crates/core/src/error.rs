use thiserror::Error;

/// Errors surfaced by field operations, solvers and the run orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: String, found: String },

    #[error("field is not Hermitian (max defect {defect:.3e})")]
    NonHermitian { defect: f64 },

    #[error("Fourier support reaches |k|_inf = {found}, limit is {limit}")]
    SupportViolation { found: usize, limit: usize },

    #[error("insufficient head-room: need working cutoff {need}, have {have}")]
    Headroom { need: usize, have: usize },

    #[error("block index {j} outside -1..={j_max}")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("instability at t = {time:.6}: |value| = {value:.3e} exceeds ceiling {ceiling:.3e}")]
    Instability { time: f64, value: f64, ceiling: f64 },

    #[error("driver mismatch: {0}")]
    DriverMismatch(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
