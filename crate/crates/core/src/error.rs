use thiserror::Error;

/// Errors raised by the solver components.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dual generator {index} has w·e = {value:e}, e is not interior to the cone")]
    DegenerateGenerator { index: usize, value: f64 },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("non-finite value while evaluating {0}")]
    NonFiniteValue(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("partition set has {size} elements, cap is {cap}")]
    PartitionTooLarge { size: u128, cap: usize },

    #[error("direction subproblem did not converge after {iterations} iterations (gap {gap:e})")]
    SubproblemNotConverged { iterations: usize, gap: f64 },

    #[error("line search failed: {0}")]
    LineSearchFailed(String),

    #[error("beta denominator {0:e} is too small")]
    DenominatorTooSmall(f64),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
