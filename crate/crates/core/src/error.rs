use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported operator: {0}")]
    Unsupported(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("degenerate geometry: {0}; retry with the numeric path and a widened tolerance")]
    DegenerateGeometry(String),

    #[error("analytic formula undefined: {0}")]
    AnalyticDegenerate(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("operator is not permutation invariant: weight class {w:?} has spread {spread:e}")]
    NotPermutationInvariant { w: [usize; 3], spread: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
