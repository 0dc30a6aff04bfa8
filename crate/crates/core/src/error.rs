use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Kraus operators do not sum to the identity (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("superoperator is not invertible (condition number {condition:e})")]
    NonInvertible { condition: f64 },

    #[error("reset probability r({t}) = {value} is outside [0, 1]")]
    InvalidResetProbability { t: usize, value: f64 },

    #[error("survival probability S({t}) = {value} is outside [0, 1]")]
    InvalidSurvival { t: usize, value: f64 },

    #[error("survival probability S({t}) vanishes, r({next}) is undefined", next = t + 1)]
    DegenerateSurvival { t: usize },

    #[error("time {requested} exceeds the schedule horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    #[error("reset state is not stationary under the channel (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("schedule parse error at line {line}: {message}")]
    ScheduleParse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
