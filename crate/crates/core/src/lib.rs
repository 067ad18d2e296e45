//! Covariance-thresholded lasso.
//!
//! The lasso's quadratic term uses the sample covariance `Σ̂ = XᵀX/n`; the
//! covariance-thresholded lasso replaces it by an element-wise regularized
//! `Σ̂_ν` (hard, soft, adaptive thresholding, or the elastic-net operator) and
//! solves the resulting path with a modified LARS.
//!
//! Modules:
//! - [`covariance`]: standardization, `Σ̂`, thresholding operators.
//! - [`path`]: the path solver, KKT checks and a coordinate-descent oracle.
//! - [`estimators`]: lasso, UST, adaptive lasso, elastic net on top of the path.
//! - [`model_selection`]: k-fold CV, the one-standard-error variants, grid
//!   search, best-possible tuning and SIS screening.
//! - [`metrics`]: G-measure, RPE, sign agreement, bootstrap SEs.
//! - [`simulation`]: the Gaussian designs and replicated experiments.
//! - [`diagnostics`]: irrepresentable indices, sparsity degrees, sign-recovery
//!   certificates.
//! - [`cli`]: the `ctlasso` command-line front end.

pub mod cli;
pub mod covariance;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod model_selection;
pub mod path;
pub mod simulation;

pub use covariance::{
    apply_threshold, min_eigenvalue, sample_covariance, standardize, CovMatrix,
    StandardizedDesign, ThresholdKind, ThresholdRule,
};
pub use error::{Error, Result};
pub use nalgebra;
pub use path::{
    ct_lars, kkt_check, oracle_solve, residual_correlations, Breakpoint, PathOptions,
    SolutionPath, Termination,
};
