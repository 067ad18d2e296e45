//! Selection and prediction accuracy measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::CovMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub tp: usize,
    pub fp: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Geometric mean of sensitivity and specificity.
    pub g: f64,
}

/// Compare supports (exact nonzero test) of an estimate and the truth.
pub fn selection_metrics(beta_hat: &[f64], beta_star: &[f64]) -> Result<SelectionMetrics> {
    let p = beta_star.len();
    if beta_hat.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: beta_hat.len(),
        });
    }
    let s = beta_star.iter().filter(|b| **b != 0.0).count();
    if s == 0 || s == p {
        return Err(Error::DegenerateTruth { s, p });
    }
    let mut tp = 0;
    let mut fp = 0;
    for (h, t) in beta_hat.iter().zip(beta_star) {
        if *h != 0.0 {
            if *t != 0.0 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let sensitivity = tp as f64 / s as f64;
    let specificity = 1.0 - fp as f64 / (p - s) as f64;
    Ok(SelectionMetrics {
        tp,
        fp,
        sensitivity,
        specificity,
        g: (sensitivity * specificity).sqrt(),
    })
}

/// Relative prediction error `(β̂−β*)ᵀ Σ (β̂−β*) / σ²`.
pub fn rpe(beta_hat: &[f64], beta_star: &[f64], sigma_pop: &CovMatrix, sigma_noise: f64) -> f64 {
    let d: Vec<f64> = beta_hat.iter().zip(beta_star).map(|(a, b)| a - b).collect();
    let sd = sigma_pop.mul_vec(&d);
    let quad: f64 = d.iter().zip(&sd).map(|(a, b)| a * b).sum();
    quad / (sigma_noise * sigma_noise)
}

/// `sgn(β̂) == sgn(β*)` component-wise, with `sgn(0) = 0`.
pub fn sign_agreement(beta_hat: &[f64], beta_star: &[f64]) -> bool {
    fn sgn(t: f64) -> i8 {
        if t > 0.0 {
            1
        } else if t < 0.0 {
            -1
        } else {
            0
        }
    }
    beta_hat.len() == beta_star.len()
        && beta_hat.iter().zip(beta_star).all(|(a, b)| sgn(*a) == sgn(*b))
}

/// Median; even-length samples average the two middle values.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Standard deviation of the median over `b` bootstrap resamples.
pub fn bootstrap_se_of_median(values: &[f64], b: usize, seed: u64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySubset);
    }
    if b < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bootstrap resamples, got {b}"
        )));
    }
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; n];
    let medians: Vec<f64> = (0..b)
        .map(|_| {
            for s in sample.iter_mut() {
                *s = values[rng.random_range(0..n)];
            }
            median(&sample)
        })
        .collect();
    let mean = medians.iter().sum::<f64>() / b as f64;
    let var = medians.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok(var.sqrt())
}
