//! Theory-side quantities: irrepresentable indices, covariance sparsity
//! degrees, and the finite-sample sign-recovery certificate.
//!
//! The certificate conditions are evaluated on the thresholded sample
//! covariance with the realized noise vector:
//!
//! ```text
//! Λ_min(Σ̂ᵛ_SS) > 0
//! ‖Σ̂ᵛ_CS (Σ̂ᵛ_SS)⁻¹‖∞ (e_S + sνρ̄ + λ) + sνρ̄ + e_C ≤ λ
//! ‖(Σ̂ᵛ_SS)⁻¹‖∞ (e_S + sνρ̄ + λ) < ρ_min
//! ```
//!
//! with `e_S = ‖X_Sᵀε/n‖∞`, `e_C = ‖X_Cᵀε/n‖∞`, `ρ̄ = max|β*_S|` and
//! `ρ_min = min|β*_S|`. When all three hold, the solution at `λ` has the
//! signs of `β*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covariance::{
    apply_threshold, min_eigenvalue_of, sample_covariance, CovMatrix, StandardizedDesign,
    ThresholdKind, ThresholdRule,
};
use crate::error::{Error, Result};

const ZERO_TOL: f64 = 1e-14;

/// Irrepresentable index per irrelevant variable (in increasing index
/// order) and the sign-free bound `‖Σ_CS Σ_SS⁻¹‖∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrepIndex {
    pub irrelevant: Vec<usize>,
    pub entries: Vec<f64>,
    pub norm_inf: f64,
}

impl IrrepIndex {
    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(*v))
    }
}

pub fn irrepresentable_index(cov: &CovMatrix, s_set: &[usize], signs: &[f64]) -> Result<IrrepIndex> {
    let p = cov.p();
    let s_set = validate_subset(s_set, p)?;
    if signs.len() != s_set.len() {
        return Err(Error::DimensionMismatch {
            expected: s_set.len(),
            found: signs.len(),
        });
    }
    let c_set = complement(&s_set, p);
    let ss_inv = invert(cov.block(&s_set, &s_set))?;
    // rows of Σ_CS Σ_SS⁻¹
    let w = cov.block(&c_set, &s_set) * &ss_inv;
    let sg = nalgebra::DVector::from_column_slice(signs);
    let entries: Vec<f64> = (&w * sg).iter().map(|v| v.abs()).collect();
    Ok(IrrepIndex {
        irrelevant: c_set,
        entries,
        norm_inf: norm_inf(&w),
    })
}

/// `(d*_SS, d*_CS)`: the largest number of nonzero entries in a row of the
/// `S×S` and `C×S` blocks.
pub fn sparsity_degrees(cov: &CovMatrix, s_set: &[usize]) -> Result<(usize, usize)> {
    let p = cov.p();
    let s_set = validate_subset(s_set, p)?;
    let c_set = complement(&s_set, p);
    let row_count = |i: usize| {
        s_set
            .iter()
            .filter(|&&j| cov.get(i, j).abs() > ZERO_TOL)
            .count()
    };
    let d_ss = s_set.iter().map(|&i| row_count(i)).max().unwrap_or(0);
    let d_cs = c_set.iter().map(|&i| row_count(i)).max().unwrap_or(0);
    Ok((d_ss, d_cs))
}

/// `c·√(ln(s(p−s)))/√n`.
pub fn recommended_nu(n: usize, p: usize, s: usize, c: f64) -> Result<f64> {
    if n == 0 || s == 0 || s >= p {
        return Err(Error::InvalidParameter(format!(
            "need n ≥ 1 and 1 ≤ s < p, got n={n}, s={s}, p={p}"
        )));
    }
    let k = (s * (p - s)) as f64;
    Ok(c * k.ln().max(0.0).sqrt() / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma1Condition {
    Nonsingularity,
    IrrepBound,
    BetaMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Certificate {
    pub holds: bool,
    pub which_failed: Vec<Lemma1Condition>,
    /// Left-hand side of the irrepresentable bound (compared to `λ`).
    pub irrep_lhs: f64,
    /// Left-hand side of the coefficient-size bound (compared to `ρ_min`).
    pub beta_min_lhs: f64,
    /// Perturbation bound used in place of `ν` in `sνρ̄`.
    pub nu_effective: f64,
}

/// Largest admissible change `|s(σ) − σ|` of an off-diagonal entry under
/// `rule`. Hard, soft and adaptive thresholding move an entry by at most
/// `ν`; the elastic-net operator is measured on the realized matrix.
pub fn perturbation_bound(sample: &CovMatrix, rule: &ThresholdRule) -> f64 {
    match rule.kind {
        ThresholdKind::Identity => 0.0,
        ThresholdKind::Hard | ThresholdKind::Soft | ThresholdKind::Adaptive => rule.nu,
        ThresholdKind::ElasticNet => {
            let p = sample.p();
            let mut worst = 0.0f64;
            for i in 0..p {
                for j in 0..p {
                    if i != j {
                        let v = sample.get(i, j);
                        worst = worst.max((rule.apply_scalar(v) - v).abs());
                    }
                }
            }
            worst
        }
    }
}

/// Noise terms `(‖X_Sᵀε/n‖∞, ‖X_Cᵀε/n‖∞)`.
fn noise_terms(design: &StandardizedDesign, eps: &[f64], s_set: &[usize]) -> (f64, f64) {
    let n = design.n() as f64;
    let mut e_s = 0.0f64;
    let mut e_c = 0.0f64;
    for j in 0..design.p() {
        let v = (design.x.column(j).iter().zip(eps).map(|(a, b)| a * b).sum::<f64>() / n).abs();
        if s_set.binary_search(&j).is_ok() {
            e_s = e_s.max(v);
        } else {
            e_c = e_c.max(v);
        }
    }
    (e_s, e_c)
}

/// Evaluates the sign-recovery certificate. `beta_star` and `eps` live on
/// the design's standardized scale, `y = Xβ* + ε`.
pub fn lemma1_certificate(
    design: &StandardizedDesign,
    eps: &[f64],
    beta_star: &[f64],
    rule: &ThresholdRule,
    lambda: f64,
) -> Result<Lemma1Certificate> {
    let p = design.p();
    if beta_star.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: beta_star.len(),
        });
    }
    if eps.len() != design.n() {
        return Err(Error::DimensionMismatch {
            expected: design.n(),
            found: eps.len(),
        });
    }
    rule.validate()?;
    let s_set: Vec<usize> = (0..p).filter(|&j| beta_star[j] != 0.0).collect();
    if s_set.is_empty() {
        return Err(Error::DegenerateTruth { s: 0, p });
    }
    let sample = sample_covariance(design);
    let cov = apply_threshold(&sample, rule);
    let nu = perturbation_bound(&sample, rule);
    let (e_s, e_c) = noise_terms(design, eps, &s_set);
    let rho_bar = s_set.iter().fold(0.0f64, |m, &j| m.max(beta_star[j].abs()));
    let rho_min = s_set.iter().fold(f64::INFINITY, |m, &j| m.min(beta_star[j].abs()));
    let bias = s_set.len() as f64 * nu * rho_bar;
    let c_set = complement(&s_set, p);
    Ok(certificate_from_parts(
        &cov, &s_set, &c_set, e_s, e_c, bias, lambda, rho_min, nu,
    ))
}

#[allow(clippy::too_many_arguments)]
fn certificate_from_parts(
    cov: &CovMatrix,
    s_set: &[usize],
    c_set: &[usize],
    e_s: f64,
    e_c: f64,
    bias: f64,
    lambda: f64,
    rho_min: f64,
    nu: f64,
) -> Lemma1Certificate {
    let ss = cov.block(s_set, s_set);
    let lmin = min_eigenvalue_of(ss.clone());
    let inv = if lmin > 0.0 { invert(ss).ok() } else { None };
    let Some(inv) = inv else {
        return Lemma1Certificate {
            holds: false,
            which_failed: vec![
                Lemma1Condition::Nonsingularity,
                Lemma1Condition::IrrepBound,
                Lemma1Condition::BetaMin,
            ],
            irrep_lhs: f64::INFINITY,
            beta_min_lhs: f64::INFINITY,
            nu_effective: nu,
        };
    };
    let inner = e_s + bias + lambda;
    let m = if c_set.is_empty() {
        0.0
    } else {
        norm_inf(&(cov.block(c_set, s_set) * &inv))
    };
    let irrep_lhs = m * inner + bias + e_c;
    let beta_min_lhs = norm_inf(&inv) * inner;
    let mut which_failed = Vec::new();
    if irrep_lhs > lambda {
        which_failed.push(Lemma1Condition::IrrepBound);
    }
    if !(beta_min_lhs < rho_min) {
        which_failed.push(Lemma1Condition::BetaMin);
    }
    Lemma1Certificate {
        holds: which_failed.is_empty(),
        which_failed,
        irrep_lhs,
        beta_min_lhs,
        nu_effective: nu,
    }
}

/// Summary of the theory quantities for one covariance and true support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub irrelevant: Vec<usize>,
    pub irrep_index: Vec<f64>,
    pub irrep_max: f64,
    pub irrep_norm_inf: f64,
    pub d_ss: usize,
    pub d_cs: usize,
    pub lambda_min_ss: f64,
    /// `‖Σ_SS⁻¹‖∞`.
    pub inv_ss_norm_inf: f64,
    pub max_abs_beta: f64,
    pub min_abs_beta: f64,
    pub nu_recommended: f64,
    pub lemma1: Option<Lemma1Certificate>,
}

/// Builds a report for `cov` (population or thresholded sample) and the
/// support of `beta_star`. `n` feeds the recommended threshold.
pub fn diagnose(cov: &CovMatrix, beta_star: &[f64], n: usize) -> Result<DiagnosticsReport> {
    let p = cov.p();
    if beta_star.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: beta_star.len(),
        });
    }
    let s_set: Vec<usize> = (0..p).filter(|&j| beta_star[j] != 0.0).collect();
    if s_set.is_empty() || s_set.len() == p {
        return Err(Error::DegenerateTruth { s: s_set.len(), p });
    }
    let signs: Vec<f64> = s_set.iter().map(|&j| beta_star[j].signum()).collect();
    let irrep = irrepresentable_index(cov, &s_set, &signs)?;
    let (d_ss, d_cs) = sparsity_degrees(cov, &s_set)?;
    let ss = cov.block(&s_set, &s_set);
    let lambda_min_ss = min_eigenvalue_of(ss.clone());
    let inv_ss_norm_inf = norm_inf(&invert(ss)?);
    Ok(DiagnosticsReport {
        irrep_max: irrep.max(),
        irrep_norm_inf: irrep.norm_inf,
        irrelevant: irrep.irrelevant,
        irrep_index: irrep.entries,
        d_ss,
        d_cs,
        lambda_min_ss,
        inv_ss_norm_inf,
        max_abs_beta: s_set.iter().fold(0.0f64, |m, &j| m.max(beta_star[j].abs())),
        min_abs_beta: s_set.iter().fold(f64::INFINITY, |m, &j| m.min(beta_star[j].abs())),
        nu_recommended: recommended_nu(n.max(1), p, s_set.len(), 1.0)?,
        lemma1: None,
    })
}

fn validate_subset(s_set: &[usize], p: usize) -> Result<Vec<usize>> {
    if s_set.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&bad) = s_set.iter().find(|&&i| i >= p) {
        return Err(Error::IndexOutOfRange { index: bad, dim: p });
    }
    let mut s = s_set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() == p {
        return Err(Error::InvalidParameter(
            "support must be a proper subset".into(),
        ));
    }
    Ok(s)
}

fn complement(s_set: &[usize], p: usize) -> Vec<usize> {
    (0..p).filter(|j| s_set.binary_search(j).is_err()).collect()
}

fn invert(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if min_eigenvalue_of(m.clone()) <= 0.0 {
        return Err(Error::SingularSS);
    }
    m.try_inverse().ok_or(Error::SingularSS)
}

fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::standardize;

    fn equicorrelated(p: usize, rho: f64) -> CovMatrix {
        CovMatrix::from_matrix(DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho }))
            .unwrap()
    }

    #[test]
    fn identity_index_is_zero() {
        let r = irrepresentable_index(&CovMatrix::identity(5), &[0, 2], &[1.0, -1.0]).unwrap();
        assert_eq!(r.irrelevant, vec![1, 3, 4]);
        assert!(r.entries.iter().all(|v| *v == 0.0));
        assert_eq!(r.norm_inf, 0.0);
    }

    #[test]
    fn equicorrelation_closed_form() {
        let (p, s, rho) = (30, 20, 0.95);
        let cov = equicorrelated(p, rho);
        let s_set: Vec<usize> = (0..s).collect();
        let r = irrepresentable_index(&cov, &s_set, &vec![1.0; s]).unwrap();
        let want = rho * s as f64 / (1.0 - rho + s as f64 * rho);
        assert!((want - 0.99738).abs() < 1e-5);
        for v in &r.entries {
            assert!((v - want).abs() < 1e-10);
        }
        // same coefficient multiplies every sign, so the sign-free norm agrees
        assert!((r.norm_inf - want).abs() < 1e-10);
    }

    #[test]
    fn ar_scalar_case() {
        let cov = CovMatrix::from_matrix(DMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                1.0
            } else {
                0.5
            }
        }))
        .unwrap();
        let r = irrepresentable_index(&cov, &[0], &[1.0]).unwrap();
        assert_eq!(r.entries, vec![0.5]);
    }

    #[test]
    fn singular_support_block() {
        let cov = equicorrelated(3, 1.0);
        assert!(matches!(
            irrepresentable_index(&cov, &[0, 1], &[1.0, 1.0]),
            Err(Error::SingularSS)
        ));
    }

    #[test]
    fn permuting_irrelevant_variables_permutes_entries() {
        let m = DMatrix::from_fn(5, 5, |i, j| 0.4f64.powi((i as i32 - j as i32).abs()));
        let cov = CovMatrix::from_matrix(m.clone()).unwrap();
        let base = irrepresentable_index(&cov, &[0, 1], &[1.0, -1.0]).unwrap();
        // swap variables 2 and 4
        let perm = [0usize, 1, 4, 3, 2];
        let pm = DMatrix::from_fn(5, 5, |i, j| m[(perm[i], perm[j])]);
        let moved =
            irrepresentable_index(&CovMatrix::from_matrix(pm).unwrap(), &[0, 1], &[1.0, -1.0])
                .unwrap();
        assert_eq!(base.entries[0], moved.entries[2]);
        assert_eq!(base.entries[1], moved.entries[1]);
        assert_eq!(base.entries[2], moved.entries[0]);
    }

    #[test]
    fn sparsity_degree_examples() {
        assert_eq!(sparsity_degrees(&CovMatrix::identity(6), &[1, 4]).unwrap(), (1, 0));
        assert_eq!(sparsity_degrees(&equicorrelated(8, 0.95), &[0, 1, 2]).unwrap(), (3, 3));
        let mut m = DMatrix::identity(6, 6);
        m[(0, 4)] = 1e-15;
        m[(4, 0)] = 1e-15;
        m[(1, 5)] = 0.2;
        m[(5, 1)] = 0.2;
        let cov = CovMatrix::from_matrix(m).unwrap();
        assert_eq!(sparsity_degrees(&cov, &[0, 1]).unwrap(), (1, 1));
    }

    #[test]
    fn recommended_nu_examples() {
        let v = recommended_nu(100, 110, 10, 1.0).unwrap();
        assert!((v - 1000f64.ln().sqrt() / 10.0).abs() < 1e-15);
        assert!((v - 0.2628).abs() < 1e-4);
        let q = recommended_nu(400, 110, 10, 1.0).unwrap();
        assert!((q - v / 2.0).abs() < 1e-15);
        assert!(recommended_nu(100, 110, 20, 1.0).unwrap() > v);
        assert!(recommended_nu(100, 10, 0, 1.0).is_err());
    }

    /// Two orthonormal columns (divisor n) plus an orthogonal third.
    fn orthogonal_design(beta: &[f64]) -> (StandardizedDesign, Vec<f64>) {
        let rows = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let x = DMatrix::from_fn(4, 3, |i, j| rows[i][j]);
        let y: Vec<f64> = (0..4).map(|i| (0..3).map(|j| x[(i, j)] * beta[j]).sum()).collect();
        let d = standardize(&x, &y).unwrap();
        (d, vec![0.0; 4])
    }

    #[test]
    fn noiseless_orthogonal_certificate_holds() {
        let beta = [2.0, -1.0, 0.0];
        let (d, eps) = orthogonal_design(&beta);
        let c = lemma1_certificate(&d, &eps, &beta, &ThresholdRule::identity(), 0.5).unwrap();
        assert!(c.holds, "{c:?}");
        assert_eq!(c.irrep_lhs, 0.0);
        assert!((c.beta_min_lhs - 0.5).abs() < 1e-12);
        let c = lemma1_certificate(&d, &eps, &beta, &ThresholdRule::identity(), 1.5).unwrap();
        assert_eq!(c.which_failed, vec![Lemma1Condition::BetaMin]);
    }

    #[test]
    fn duplicated_true_columns_fail_nonsingularity() {
        let x = DMatrix::from_row_slice(4, 3, &[
            1.0, 1.0, 0.3, 2.0, 2.0, -1.0, -1.0, -1.0, 0.5, 0.0, 0.0, 2.0,
        ]);
        let beta = [1.0, 1.0, 0.0];
        let y: Vec<f64> = (0..4).map(|i| x[(i, 0)] + x[(i, 1)]).collect();
        let d = standardize(&x, &y).unwrap();
        let c = lemma1_certificate(&d, &[0.0; 4], &beta, &ThresholdRule::identity(), 0.1).unwrap();
        assert!(!c.holds);
        assert!(c.which_failed.contains(&Lemma1Condition::Nonsingularity));
    }

    #[test]
    fn report_fields() {
        let cov = equicorrelated(10, 0.5);
        let mut beta = vec![0.0; 10];
        beta[0] = 3.0;
        beta[1] = -1.0;
        let r = diagnose(&cov, &beta, 100).unwrap();
        assert_eq!((r.d_ss, r.d_cs), (2, 2));
        assert!((r.lambda_min_ss - 0.5).abs() < 1e-12);
        assert_eq!((r.max_abs_beta, r.min_abs_beta), (3.0, 1.0));
        assert_eq!(r.irrep_index.len(), 8);
        // with opposite signs the two contributions cancel
        assert!(r.irrep_max < 1e-12);
        assert!((r.irrep_norm_inf - 2.0 / 3.0).abs() < 1e-12);
    }
}
