use crate::covariance::{apply_threshold, sample_covariance, CovMatrix, StandardizedDesign, ThresholdRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub max_iters: usize,
    /// Converged once a full sweep moves no coefficient by more than this.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            tol: 1e-10,
        }
    }
}

/// Minimize the thresholded objective at one λ by cyclic coordinate descent.
pub fn oracle_solve(
    design: &StandardizedDesign,
    rule: &ThresholdRule,
    lambda: f64,
    opts: &OracleOptions,
) -> Result<Vec<f64>> {
    rule.validate()?;
    let cov_nu = apply_threshold(&sample_covariance(design), rule);
    oracle_solve_cov(&cov_nu, &design.xty(), lambda, opts)
}

pub fn oracle_solve_cov(
    cov: &CovMatrix,
    xty: &[f64],
    lambda: f64,
    opts: &OracleOptions,
) -> Result<Vec<f64>> {
    let p = cov.p();
    if xty.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: xty.len(),
        });
    }
    if let Some(j) = (0..p).find(|&j| !(cov.get(j, j) > 0.0)) {
        return Err(Error::IndefiniteMatrix(format!(
            "diagonal entry {j} is {}",
            cov.get(j, j)
        )));
    }
    let scale = xty.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let m = cov.as_matrix();
    let mut beta = vec![0.0; p];
    let mut c = xty.to_vec();
    let mut last_change = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let mut change = 0.0f64;
        for j in 0..p {
            let d = m[(j, j)];
            let z = c[j] + d * beta[j];
            let new = soft(z, lambda) / d;
            let diff = new - beta[j];
            if diff != 0.0 {
                beta[j] = new;
                for (ci, s) in c.iter_mut().zip(m.column(j).iter()) {
                    *ci -= s * diff;
                }
                change = change.max(diff.abs());
            }
        }
        if !change.is_finite() || beta.iter().any(|b| b.abs() > 1e12 * scale) {
            return Err(Error::IndefiniteMatrix(
                "coordinate descent diverged".to_string(),
            ));
        }
        last_change = change;
        if change < opts.tol {
            return Ok(beta);
        }
    }
    Err(Error::NotConverged {
        iters: opts.max_iters,
        last_change,
    })
}

fn soft(z: f64, lambda: f64) -> f64 {
    (z.abs() - lambda).max(0.0).copysign(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn scalar_soft_threshold() {
        let cov = CovMatrix::identity(1);
        let b = oracle_solve_cov(&cov, &[0.7], 0.2, &OracleOptions::default()).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn separable_two_predictors() {
        let cov = CovMatrix::identity(2);
        let b = oracle_solve_cov(&cov, &[0.9, 0.1], 0.5, &OracleOptions::default()).unwrap();
        assert!((b[0] - 0.4).abs() < 1e-14);
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn negative_diagonal_is_rejected() {
        let cov = CovMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(matches!(
            oracle_solve_cov(&cov, &[0.5, 0.5], 0.1, &OracleOptions::default()),
            Err(Error::IndefiniteMatrix(_))
        ));
    }

    #[test]
    fn indefinite_matrix_diverges() {
        let cov = CovMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(oracle_solve_cov(&cov, &[1.0, 1.0], 0.1, &OracleOptions::default()).is_err());
    }
}
