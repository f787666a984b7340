use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (max |u†u - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("{routine} did not converge within {limit} iterations")]
    NoConvergence { routine: &'static str, limit: usize },

    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("mixing weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("input collection is empty")]
    EmptyInput,

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("invalid spin j = {0}: 2j must be a nonnegative integer")]
    InvalidSpin(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
