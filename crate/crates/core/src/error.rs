use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid subsystem selection {keep:?} for factors {factor_dims:?}")]
    InvalidSubsystem {
        keep: Vec<usize>,
        factor_dims: Vec<usize>,
    },

    #[error("operator is not Hermitian: max |A - A^dagger| = {deviation:e} exceeds {bound:e}")]
    NotHermitian { deviation: f64, bound: f64 },

    #[error("operator does not have unit trace: trace = {trace}, allowed deviation {bound:e}")]
    NotUnitTrace { trace: f64, bound: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue = {min_eigenvalue:e} below -{bound:e}")]
    NotPsd { min_eigenvalue: f64, bound: f64 },

    #[error("operator is not unitary: max |U^dagger U - I| = {deviation:e} exceeds {bound:e}")]
    NotUnitary { deviation: f64, bound: f64 },

    #[error("invalid Kraus family: {0}")]
    InvalidKraus(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("conditioning event has probability {probability:e}, below cutoff {cutoff:e}")]
    ZeroProbabilityEvent { probability: f64, cutoff: f64 },

    #[error("value {value} outside allowed range [{min}, {max}] for {what}")]
    OutOfRange {
        what: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid ket: {0}")]
    InvalidKet(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid empirical model: {0}")]
    InvalidModel(String),

    #[error("{sub:?} is not a subset of {of:?}")]
    NotSubset { sub: Vec<usize>, of: Vec<usize> },

    #[error("unknown context {0:?}")]
    UnknownContext(Vec<usize>),

    #[error("model is not compatible on overlaps: max deviation {max_deviation:e} exceeds {tolerance:e}")]
    IncompatibleModel { max_deviation: f64, tolerance: f64 },

    #[error("global-section problem too large: {variables} variables (limit {limit})")]
    TooLarge { variables: usize, limit: usize },

    #[error("scenario is not CHSH-shaped: {0}")]
    WrongScenario(String),

    #[error("rounding to a rational model failed: {0}")]
    Rounding(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
