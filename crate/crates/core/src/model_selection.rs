//! Tuning: k-fold cross-validation with the one-standard-error variants,
//! grid search over the non-λ parameters, ex-post-facto best-possible
//! tuning against a known truth, and sure independence screening.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{standardize, StandardizedDesign, ThresholdKind, ThresholdRule};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Moments, TuningGrids};
use crate::metrics::selection_metrics;
use crate::path::{PathOptions, SolutionPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CvVariant {
    /// Smallest λ within one standard error of the minimum (more variables).
    CvMinus,
    CvZero,
    /// Largest λ within one standard error of the minimum (fewer variables).
    CvPlus,
    /// `CvMinus` when `n/√p < 5`, otherwise `CvZero`.
    Auto,
}

impl CvVariant {
    pub fn resolve(self, n: usize, p: usize) -> CvVariant {
        match self {
            CvVariant::Auto if (n as f64) / (p as f64).sqrt() < 5.0 => CvVariant::CvMinus,
            CvVariant::Auto => CvVariant::CvZero,
            v => v,
        }
    }
}

impl fmt::Display for CvVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CvVariant::CvMinus => "cv-",
            CvVariant::CvZero => "cv0",
            CvVariant::CvPlus => "cv+",
            CvVariant::Auto => "auto",
        })
    }
}

impl FromStr for CvVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "cv-" | "minus" | "cv-minus" => CvVariant::CvMinus,
            "cv0" | "zero" | "cv-zero" => CvVariant::CvZero,
            "cv+" | "plus" | "cv-plus" => CvVariant::CvPlus,
            "auto" => CvVariant::Auto,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown CV variant '{other}' (expected cv-, cv0, cv+ or auto)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCurve {
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    pub mean_error: Vec<f64>,
    /// Standard error of the fold mean.
    pub sd_error: Vec<f64>,
    pub folds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvChoice {
    pub lambda: f64,
    pub index: usize,
    pub variant_used: CvVariant,
    pub min_error: f64,
    pub min_index: usize,
    /// `min_error + sd_error[min_index]`.
    pub threshold_used: f64,
    pub selected_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSelection {
    pub lambda_hat: f64,
    pub variant_used: CvVariant,
    pub spec_hat: EstimatorSpec,
    pub rule_hat: ThresholdRule,
    pub diagnostics: CvChoice,
    pub curve: CvCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub variant: CvVariant,
    pub seed: u64,
    pub n_lambda: usize,
    /// Smallest grid λ as a fraction of λ_max.
    pub lambda_ratio: f64,
    pub path: PathOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            k: 5,
            variant: CvVariant::Auto,
            seed: 0,
            n_lambda: 100,
            lambda_ratio: 1e-3,
            path: PathOptions::default(),
        }
    }
}

/// `n_points` log-spaced values from `lambda_max` down to
/// `ratio·lambda_max`.
pub fn lambda_grid(lambda_max: f64, n_points: usize, ratio: f64) -> Vec<f64> {
    if n_points == 0 || !(lambda_max > 0.0) {
        return Vec::new();
    }
    if n_points == 1 {
        return vec![lambda_max];
    }
    let lo = ratio.ln();
    (0..n_points)
        .map(|i| lambda_max * (lo * i as f64 / (n_points - 1) as f64).exp())
        .collect()
}

/// Shuffled round-robin fold labels in `0..k`.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (i, &row) in perm.iter().enumerate() {
        fold[row] = i % k;
    }
    fold
}

/// One training/validation split, with the training portion re-standardized
/// and the validation rows mapped through the training transform.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub moments: Moments,
    pub val_x: DMatrix<f64>,
    pub val_y: Vec<f64>,
    pub train_y_mean: f64,
}

impl FoldData {
    /// Mean squared prediction error on the validation rows.
    pub fn error(&self, beta: &[f64]) -> f64 {
        let pred = &self.val_x * DVector::from_column_slice(beta);
        let sse: f64 = pred
            .iter()
            .zip(&self.val_y)
            .map(|(f, y)| (y - f - self.train_y_mean).powi(2))
            .sum();
        sse / self.val_y.len() as f64
    }
}

pub fn prepare_folds(design: &StandardizedDesign, fold_of: &[usize], k: usize) -> Result<Vec<FoldData>> {
    let n = design.n();
    if fold_of.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: fold_of.len(),
        });
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2 folds, got {k}")));
    }
    if n < 2 * k {
        return Err(Error::TooFewSamples {
            needed: 2 * k,
            found: n,
        });
    }
    (0..k)
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
            let val: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
            if val.is_empty() || train.len() < 2 {
                return Err(Error::TooFewSamples {
                    needed: 2 * k,
                    found: n,
                });
            }
            let tx = design.x.select_rows(&train);
            let ty: Vec<f64> = train.iter().map(|&i| design.y[i]).collect();
            let td = standardize(&tx, &ty)?;
            let val_x = td.transform_rows(&design.x.select_rows(&val))?;
            Ok(FoldData {
                moments: Moments::from_design(&td),
                val_x,
                val_y: val.iter().map(|&i| design.y[i]).collect(),
                train_y_mean: td.y_mean,
            })
        })
        .collect()
}

/// Fits a path, keeping the part computed before a singular active block.
pub fn fit_lenient(spec: &EstimatorSpec, m: &Moments, opts: &PathOptions) -> Result<SolutionPath> {
    match spec.fit_moments(m, opts) {
        Err(Error::SingularActiveSubmatrix { path }) if !path.breakpoints.is_empty() => Ok(*path),
        other => other,
    }
}

/// Cross-validation curve over prepared folds.
pub fn cv_curve(
    folds: &[FoldData],
    spec: &EstimatorSpec,
    lambdas: &[f64],
    opts: &PathOptions,
) -> Result<CvCurve> {
    let k = folds.len();
    let per_fold: Vec<Vec<f64>> = folds
        .iter()
        .map(|fold| {
            let path = fit_lenient(spec, &fold.moments, opts)?;
            lambdas
                .iter()
                .map(|&lam| Ok(fold.error(&path.coefficients_at(lam, true)?)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let kf = k as f64;
    let mut mean_error = Vec::with_capacity(lambdas.len());
    let mut sd_error = Vec::with_capacity(lambdas.len());
    for l in 0..lambdas.len() {
        let mean = per_fold.iter().map(|e| e[l]).sum::<f64>() / kf;
        let var = per_fold.iter().map(|e| (e[l] - mean).powi(2)).sum::<f64>() / (kf - 1.0);
        mean_error.push(mean);
        sd_error.push((var / kf).sqrt());
    }
    Ok(CvCurve {
        lambdas: lambdas.to_vec(),
        mean_error,
        sd_error,
        folds: k,
    })
}

pub fn kfold_cv_with_folds(
    design: &StandardizedDesign,
    spec: &EstimatorSpec,
    lambdas: &[f64],
    fold_of: &[usize],
    k: usize,
    opts: &PathOptions,
) -> Result<CvCurve> {
    check_grid(lambdas)?;
    cv_curve(&prepare_folds(design, fold_of, k)?, spec, lambdas, opts)
}

pub fn kfold_cv(
    design: &StandardizedDesign,
    spec: &EstimatorSpec,
    lambdas: &[f64],
    k: usize,
    seed: u64,
) -> Result<CvCurve> {
    let fold_of = fold_assignment(design.n(), k, seed);
    kfold_cv_with_folds(design, spec, lambdas, &fold_of, k, &PathOptions::default())
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "lambda grid must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

pub fn select_lambda(curve: &CvCurve, variant: CvVariant, n: usize, p: usize) -> Result<CvChoice> {
    if curve.lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty CV curve".into()));
    }
    let variant_used = variant.resolve(n, p);
    let mut min_index = 0;
    for (i, e) in curve.mean_error.iter().enumerate() {
        if *e < curve.mean_error[min_index] {
            min_index = i;
        }
    }
    let min_error = curve.mean_error[min_index];
    let threshold_used = min_error + curve.sd_error[min_index];
    let within = |i: &usize| curve.mean_error[*i] <= threshold_used;
    let index = match variant_used {
        CvVariant::CvZero | CvVariant::Auto => min_index,
        CvVariant::CvMinus => (min_index..curve.lambdas.len()).rev().find(within).unwrap_or(min_index),
        CvVariant::CvPlus => (0..=min_index).find(within).unwrap_or(min_index),
    };
    Ok(CvChoice {
        lambda: curve.lambdas[index],
        index,
        variant_used,
        min_error,
        min_index,
        threshold_used,
        selected_error: curve.mean_error[index],
    })
}

/// The `ν` a spec is tuned over, for tie-breaking.
fn spec_nu(spec: &EstimatorSpec) -> f64 {
    match spec.rule.kind {
        ThresholdKind::Hard | ThresholdKind::Soft | ThresholdKind::Adaptive => spec.rule.nu,
        _ => 0.0,
    }
}

/// Cross-validates every expansion of `base` over `grids` and returns the
/// candidate with the smallest validation error at its selected λ. Ties go
/// to larger `ν`, then larger λ. Each candidate's λ grid starts at its own
/// full-data λ_max.
pub fn grid_search_cv(
    design: &StandardizedDesign,
    base: &EstimatorSpec,
    grids: &TuningGrids,
    opts: &CvOptions,
) -> Result<CvSelection> {
    let specs = base.expand(grids);
    if specs.is_empty() {
        return Err(Error::InvalidParameter("empty tuning grid".into()));
    }
    let fold_of = fold_assignment(design.n(), opts.k, opts.seed);
    let folds = prepare_folds(design, &fold_of, opts.k)?;
    let full = Moments::from_design(design);
    let (n, p) = (design.n(), design.p());
    let results: Vec<Result<CvSelection>> = specs
        .par_iter()
        .map(|spec| {
            let path = fit_lenient(spec, &full, &opts.path)?;
            let grid = lambda_grid(path.lambda_max(), opts.n_lambda, opts.lambda_ratio);
            let grid = if grid.is_empty() { vec![0.0] } else { grid };
            let curve = cv_curve(&folds, spec, &grid, &opts.path)?;
            let choice = select_lambda(&curve, opts.variant, n, p)?;
            Ok(CvSelection {
                lambda_hat: choice.lambda,
                variant_used: choice.variant_used,
                spec_hat: *spec,
                rule_hat: spec.effective_rule(),
                diagnostics: choice,
                curve,
            })
        })
        .collect();
    let mut best: Option<CvSelection> = None;
    for r in results {
        let cand = r?;
        let better = match &best {
            None => true,
            Some(b) => {
                let (ec, eb) = (cand.diagnostics.selected_error, b.diagnostics.selected_error);
                ec < eb
                    || (ec == eb
                        && (spec_nu(&cand.spec_hat) > spec_nu(&b.spec_hat)
                            || (spec_nu(&cand.spec_hat) == spec_nu(&b.spec_hat)
                                && cand.lambda_hat > b.lambda_hat)))
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("non-empty grid"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPossible {
    /// Index into the path family.
    pub path_index: usize,
    pub rule: ThresholdRule,
    pub lambda: f64,
    pub g: f64,
    pub support: Vec<usize>,
}

/// Maximizes G over every support attained by any path in the family; ties
/// go to fewer selected variables, then to the earlier candidate.
pub fn best_possible_selection(paths: &[SolutionPath], truth: &[f64]) -> Result<BestPossible> {
    let p = truth.len();
    let mut best: Option<BestPossible> = None;
    let mut indicator = vec![0.0; p];
    for (pi, path) in paths.iter().enumerate() {
        for (lambda, support) in path.supports() {
            indicator.fill(0.0);
            for &j in &support {
                indicator[j] = 1.0;
            }
            let g = selection_metrics(&indicator, truth)?.g;
            let better = match &best {
                None => true,
                Some(b) => g > b.g || (g == b.g && support.len() < b.support.len()),
            };
            if better {
                best = Some(BestPossible {
                    path_index: pi,
                    rule: path.rule,
                    lambda,
                    g,
                    support,
                });
            }
        }
    }
    best.ok_or(Error::EmptySubset)
}

/// Indices of the `keep` largest `|x_jᵀy/n|`, in rank order; ties go to the
/// smaller index.
pub fn sis_screen(design: &StandardizedDesign, keep: usize) -> Result<Vec<usize>> {
    let p = design.p();
    if keep == 0 || keep > p {
        return Err(Error::InvalidParameter(format!(
            "keep must lie in 1..={p}, got {keep}"
        )));
    }
    let r = design.xty();
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()).then(a.cmp(&b)));
    idx.truncate(keep);
    Ok(idx)
}
