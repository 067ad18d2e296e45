use serde::{Deserialize, Serialize};

use crate::covariance::CovMatrix;

use super::residual_correlations;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub pass: bool,
    pub worst_violation: f64,
}

/// Stationarity and subgradient conditions of the thresholded objective at
/// `(beta, lambda)`: active correlations equal `λ·sgn(β_j)`, the rest are
/// bounded by `λ`.
pub fn kkt_check(beta: &[f64], lambda: f64, cov_nu: &CovMatrix, xty: &[f64], tol: f64) -> KktReport {
    let c = match residual_correlations(beta, cov_nu, xty) {
        Ok(c) => c,
        Err(_) => {
            return KktReport {
                pass: false,
                worst_violation: f64::INFINITY,
            }
        }
    };
    let worst = beta
        .iter()
        .zip(&c)
        .map(|(&b, &cj)| {
            if b != 0.0 {
                (cj - lambda * b.signum()).abs()
            } else {
                (cj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0f64, f64::max);
    KktReport {
        pass: worst <= tol,
        worst_violation: worst,
    }
}
