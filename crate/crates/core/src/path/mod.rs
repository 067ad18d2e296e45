//! Piecewise-linear solution paths of the covariance-thresholded lasso.
//!
//! The objective, for a fixed thresholded covariance `Σ̂_ν`, is
//!
//! ```text
//! βᵀ Σ̂_ν β − 2 βᵀ (Xᵀy/n) + 2λ ‖β‖₁
//! ```
//!
//! [`ct_lars`] traces its minimizers as λ decreases from `‖Xᵀy/n‖_∞`,
//! stopping once the active block of `Σ̂_ν` loses positive definiteness.
//! [`oracle_solve`] minimizes the same objective by coordinate descent at a
//! single λ and shares no code with the path solver.

mod factor;
mod kkt;
mod lars;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::covariance::{CovMatrix, ThresholdRule};
use crate::error::{Error, Result};

pub use kkt::{kkt_check, KktReport};
pub use lars::{ct_lars, ct_lars_cov, PathOptions};
pub use oracle::{oracle_solve, oracle_solve_cov, OracleOptions};

/// Why the path solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    CorrelationExhausted,
    EigenvalueStop,
    MaxSteps,
    LambdaFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub lambda: f64,
    pub beta: Vec<f64>,
    /// Active set after the event at this breakpoint, sorted.
    pub active: Vec<usize>,
    /// `|x_jᵀy/n| < λ` for every variable outside the support, which makes
    /// the solution global even when `Σ̂_ν` is indefinite.
    pub global: bool,
}

impl Breakpoint {
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath {
    pub breakpoints: Vec<Breakpoint>,
    pub termination: Termination,
    pub rule: ThresholdRule,
}

impl SolutionPath {
    pub fn p(&self) -> usize {
        self.breakpoints.first().map_or(0, |b| b.beta.len())
    }

    pub fn lambda_max(&self) -> f64 {
        self.breakpoints.first().map_or(0.0, |b| b.lambda)
    }

    /// λ of the last breakpoint; the path is undefined below it.
    pub fn lambda_end(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.lambda)
    }

    /// Coefficients at `lambda`, interpolating linearly between breakpoints.
    /// Below the final breakpoint this is an error unless `clamp` is set, in
    /// which case the final coefficients are returned.
    pub fn coefficients_at(&self, lambda: f64, clamp: bool) -> Result<Vec<f64>> {
        let bps = &self.breakpoints;
        let first = bps.first().ok_or(Error::EmptySubset)?;
        if lambda >= first.lambda {
            return Ok(vec![0.0; first.beta.len()]);
        }
        let last = bps.last().unwrap();
        if lambda <= last.lambda {
            if lambda == last.lambda || clamp {
                return Ok(last.beta.clone());
            }
            return Err(Error::LambdaBelowPath {
                lambda,
                floor: last.lambda,
            });
        }
        // first index whose lambda is <= the query; lambdas strictly decrease
        let k = bps.partition_point(|b| b.lambda > lambda);
        let hi = &bps[k - 1];
        let lo = &bps[k];
        if lo.lambda == lambda {
            return Ok(lo.beta.clone());
        }
        let t = (lambda - lo.lambda) / (hi.lambda - lo.lambda);
        Ok(lo
            .beta
            .iter()
            .zip(&hi.beta)
            .map(|(&b_lo, &b_hi)| {
                if b_lo == 0.0 && b_hi == 0.0 {
                    0.0
                } else {
                    b_lo + t * (b_hi - b_lo)
                }
            })
            .collect())
    }

    /// Every distinct support the path attains: each breakpoint and the
    /// interior of each segment, paired with a representative λ.
    pub fn supports(&self) -> Vec<(f64, Vec<usize>)> {
        let mut out = Vec::with_capacity(2 * self.breakpoints.len());
        for (k, bp) in self.breakpoints.iter().enumerate() {
            out.push((bp.lambda, bp.support()));
            if let Some(next) = self.breakpoints.get(k + 1) {
                let mid = 0.5 * (bp.lambda + next.lambda);
                let beta = self
                    .coefficients_at(mid, false)
                    .expect("midpoint lies on the path");
                out.push((mid, support_of(&beta)));
            }
        }
        out
    }
}

pub(crate) fn support_of(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Covariate-residual correlations `xty − Σ_νᵀ β`.
pub fn residual_correlations(beta: &[f64], cov_nu: &CovMatrix, xty: &[f64]) -> Result<Vec<f64>> {
    let p = cov_nu.p();
    for len in [beta.len(), xty.len()] {
        if len != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: len,
            });
        }
    }
    let fitted = cov_nu.mul_vec(beta);
    Ok(xty.iter().zip(fitted).map(|(r, f)| r - f).collect())
}
