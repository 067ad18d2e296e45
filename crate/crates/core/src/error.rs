use thiserror::Error;

use crate::path::SolutionPath;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ConstantColumn(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("index set is empty")]
    EmptySubset,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lambda {lambda} is below the end of the path ({floor})")]
    LambdaBelowPath { lambda: f64, floor: f64 },

    #[error("active covariance submatrix is singular after {} breakpoints", .path.breakpoints.len())]
    SingularActiveSubmatrix { path: Box<SolutionPath> },

    #[error("coordinate descent did not converge in {iters} sweeps (last change {last_change:e})")]
    NotConverged { iters: usize, last_change: f64 },

    #[error("matrix is not positive semi-definite: {0}")]
    IndefiniteMatrix(String),

    #[error("initial estimate for variable {0} is zero")]
    ZeroInitialEstimate(usize),

    #[error("true coefficient vector must have between 1 and p-1 nonzeros (got {s} of {p})")]
    DegenerateTruth { s: usize, p: usize },

    #[error("|rho| must be < 1, got {0}")]
    InvalidRho(f64),

    #[error("covariance is not positive definite: {0}")]
    NotPsd(String),

    #[error("cholesky factorization failed: {0}")]
    CholeskyFailure(String),

    #[error("true-variable covariance block is singular")]
    SingularSS,
}

pub type Result<T> = std::result::Result<T, Error>;
