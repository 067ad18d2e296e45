//! Gaussian random designs and replicated experiments.
//!
//! Every replication draws its own data from a ChaCha stream selected by
//! the replication index, so replications can run in any order (and in
//! parallel) without changing the result.

use nalgebra::{Cholesky, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{standardize, CovMatrix, ThresholdRule};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Moments, TuningGrids};
use crate::metrics::{bootstrap_se_of_median, median, rpe, selection_metrics, SelectionMetrics};
use crate::model_selection::{best_possible_selection, fit_lenient, grid_search_cv, CvOptions};
use crate::path::PathOptions;

/// Population covariance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSpec {
    Identity,
    /// `ρ^|i−j|`.
    Ar { rho: f64 },
    /// Unit diagonal, `ρ` elsewhere.
    Constant { rho: f64 },
    /// Correlation 0.15 within variables 1–10, 0.95 within 11–15, zero
    /// elsewhere off the diagonal.
    Grouped,
}

const GROUP_A: std::ops::Range<usize> = 0..10;
const GROUP_B: std::ops::Range<usize> = 10..15;

pub fn make_sigma(spec: SigmaSpec, p: usize) -> Result<CovMatrix> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("need p >= 2, got {p}")));
    }
    let m = match spec {
        SigmaSpec::Identity => DMatrix::identity(p, p),
        SigmaSpec::Ar { rho } => {
            check_rho(rho)?;
            DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
        }
        SigmaSpec::Constant { rho } => {
            check_rho(rho)?;
            if rho < -1.0 / (p as f64 - 1.0) {
                return Err(Error::NotPsd(format!(
                    "constant correlation {rho} is below -1/(p-1) for p={p}"
                )));
            }
            DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
        }
        SigmaSpec::Grouped => {
            if p < GROUP_B.end {
                return Err(Error::InvalidParameter(format!(
                    "grouped covariance needs p >= {}, got {p}",
                    GROUP_B.end
                )));
            }
            DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    1.0
                } else if GROUP_A.contains(&i) && GROUP_A.contains(&j) {
                    0.15
                } else if GROUP_B.contains(&i) && GROUP_B.contains(&j) {
                    0.95
                } else {
                    0.0
                }
            })
        }
    };
    CovMatrix::from_matrix(m)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidRho(rho));
    }
    Ok(())
}

/// Covariance of the latent-factor construction
/// `X_j = Z₁ + √(17/3)·e_j` (variables 1–10), `X_j = Z₂ + √(1/19)·e_j`
/// (11–15), `X_j = e_j` otherwise.
pub fn latent_grouped_sigma(p: usize) -> Result<CovMatrix> {
    if p < GROUP_B.end {
        return Err(Error::InvalidParameter(format!(
            "grouped covariance needs p >= {}, got {p}",
            GROUP_B.end
        )));
    }
    let m = DMatrix::from_fn(p, p, |i, j| {
        let a = GROUP_A.contains(&i) && GROUP_A.contains(&j);
        let b = GROUP_B.contains(&i) && GROUP_B.contains(&j);
        match (i == j, a, b) {
            (true, true, _) => 1.0 + 17.0 / 3.0,
            (true, _, true) => 1.0 + 1.0 / 19.0,
            (true, _, _) => 1.0,
            (false, true, _) | (false, _, true) => 1.0,
            _ => 0.0,
        }
    });
    CovMatrix::from_matrix(m)
}

/// Full recipe for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDesign {
    pub name: String,
    pub p: usize,
    pub n: usize,
    pub beta_star: Vec<f64>,
    pub sigma_spec: SigmaSpec,
    pub sigma_noise: f64,
    pub replications: usize,
    pub seed: u64,
    /// Generate the grouped design by its latent-factor recipe instead of
    /// the Cholesky factor of the unit-diagonal correlation matrix.
    #[serde(default)]
    pub latent_grouped: bool,
}

pub const PRESETS: [&str; 4] = ["intro", "example1", "example2", "example3"];

impl SimulationDesign {
    /// `p = 40`, `β*_j = 2` for `j ≤ 10`, `Σ = I`, `σ = √40` (SNR exactly 1).
    pub fn intro(n: usize) -> Self {
        let mut beta = vec![0.0; 40];
        beta[..10].fill(2.0);
        Self::new("intro", n, beta, SigmaSpec::Identity, 40f64.sqrt())
    }

    /// Autocorrelated predictors.
    pub fn example1(n: usize) -> Self {
        let mut beta = vec![0.0; 100];
        beta[..5].fill(3.0);
        beta[10..15].fill(1.5);
        Self::new("example1", n, beta, SigmaSpec::Ar { rho: 0.5 }, 9.0)
    }

    /// Constant correlation 0.95.
    pub fn example2(n: usize) -> Self {
        let mut beta = vec![0.0; 100];
        beta[10..20].fill(3.0);
        beta[30..40].fill(1.5);
        Self::new("example2", n, beta, SigmaSpec::Constant { rho: 0.95 }, 15.0)
    }

    /// Grouped predictors.
    pub fn example3(n: usize) -> Self {
        let mut beta = vec![0.0; 100];
        beta[..10].copy_from_slice(&[3.0, 3.0, 2.5, 2.5, 2.0, 2.0, 1.5, 1.5, 1.0, 1.0]);
        Self::new("example3", n, beta, SigmaSpec::Grouped, 15.0)
    }

    pub fn preset(name: &str, n: usize) -> Result<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "intro" => Ok(Self::intro(n)),
            "example1" | "ex1" => Ok(Self::example1(n)),
            "example2" | "ex2" => Ok(Self::example2(n)),
            "example3" | "ex3" => Ok(Self::example3(n)),
            _ => Err(Error::InvalidParameter(format!(
                "unknown preset '{name}' (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }

    fn new(name: &str, n: usize, beta_star: Vec<f64>, sigma_spec: SigmaSpec, sigma_noise: f64) -> Self {
        Self {
            name: name.to_string(),
            p: beta_star.len(),
            n,
            beta_star,
            sigma_spec,
            sigma_noise,
            replications: 200,
            seed: 0,
            latent_grouped: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta_star.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: self.beta_star.len(),
            });
        }
        if self.n < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                found: self.n,
            });
        }
        if !(self.sigma_noise > 0.0 && self.sigma_noise.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise level must be positive, got {}",
                self.sigma_noise
            )));
        }
        if self.latent_grouped && self.sigma_spec != SigmaSpec::Grouped {
            return Err(Error::InvalidParameter(
                "latent generation applies to the grouped covariance only".into(),
            ));
        }
        Ok(())
    }

    /// Covariance of the rows actually generated.
    pub fn population_sigma(&self) -> Result<CovMatrix> {
        if self.latent_grouped {
            latent_grouped_sigma(self.p)
        } else {
            make_sigma(self.sigma_spec, self.p)
        }
    }

    pub fn snr(&self) -> Result<f64> {
        Ok(snr(&self.beta_star, &self.population_sigma()?, self.sigma_noise))
    }
}

/// `β*ᵀ Σ β* / σ²`.
pub fn snr(beta_star: &[f64], sigma_pop: &CovMatrix, sigma_noise: f64) -> f64 {
    let sb = sigma_pop.mul_vec(beta_star);
    beta_star.iter().zip(&sb).map(|(a, b)| a * b).sum::<f64>() / (sigma_noise * sigma_noise)
}

/// One draw: predictors, response and the noise term `σε` that was added.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub noise: Vec<f64>,
}

fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Draws `n` rows from `N(0, Σ)` and `y = Xβ* + σε`, using the stream for
/// `rep_index`.
pub fn gen_data_full(design: &SimulationDesign, rep_index: usize) -> Result<SimulatedData> {
    design.validate()?;
    let (n, p) = (design.n, design.p);
    let mut rng = rep_rng(design.seed, rep_index);
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let x = if design.latent_grouped {
        let z = draw(n * (p + 2));
        DMatrix::from_fn(n, p, |i, j| {
            let row = &z[i * (p + 2)..(i + 1) * (p + 2)];
            let e = row[2 + j];
            if GROUP_A.contains(&j) {
                row[0] + (17.0f64 / 3.0).sqrt() * e
            } else if GROUP_B.contains(&j) {
                row[1] + (1.0f64 / 19.0).sqrt() * e
            } else {
                e
            }
        })
    } else {
        let sigma = make_sigma(design.sigma_spec, p)?;
        let l = Cholesky::new(sigma.into_matrix())
            .ok_or_else(|| Error::CholeskyFailure(format!("{:?}", design.sigma_spec)))?
            .unpack();
        let z = DMatrix::from_row_slice(n, p, &draw(n * p));
        z * l.transpose()
    };
    let eps = draw(n);
    let noise: Vec<f64> = eps.iter().map(|e| design.sigma_noise * e).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let signal: f64 = (0..p).map(|j| x[(i, j)] * design.beta_star[j]).sum();
            signal + noise[i]
        })
        .collect();
    Ok(SimulatedData { x, y, noise })
}

pub fn gen_data(design: &SimulationDesign, rep_index: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let d = gen_data_full(design, rep_index)?;
    Ok((d.x, d.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    BestPossible,
    CrossValidation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design: SimulationDesign,
    pub methods: Vec<EstimatorSpec>,
    pub tuning: Tuning,
    pub grids: TuningGrids,
    /// `seed` here is ignored; fold seeds derive from the design seed.
    pub cv: CvOptions,
    pub path: PathOptions,
    pub bootstrap: usize,
}

impl ExperimentConfig {
    pub fn new(design: SimulationDesign, methods: Vec<EstimatorSpec>, tuning: Tuning) -> Self {
        Self {
            design,
            methods,
            tuning,
            grids: TuningGrids::default(),
            cv: CvOptions::default(),
            path: PathOptions::default(),
            bootstrap: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningChoice {
    pub spec: EstimatorSpec,
    pub rule: ThresholdRule,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub method: String,
    pub metrics: SelectionMetrics,
    pub rpe: f64,
    pub selected_count: usize,
    pub tuning: TuningChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub replications: usize,
    pub median_g: f64,
    pub se_median_g: f64,
    pub median_rpe: f64,
    pub se_median_rpe: f64,
    pub median_tp: f64,
    pub median_fp: f64,
    pub median_sensitivity: f64,
    pub median_specificity: f64,
    pub median_selected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub design: SimulationDesign,
    pub tuning: Tuning,
    pub summaries: Vec<MethodSummary>,
    pub replications: Vec<ReplicationResult>,
}

/// Seed for the folds of replication `rep`.
fn cv_seed(seed: u64, rep: usize) -> u64 {
    seed ^ (rep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs one replication for every method.
pub fn run_replication(cfg: &ExperimentConfig, rep: usize) -> Result<Vec<ReplicationResult>> {
    let design = &cfg.design;
    let data = gen_data_full(design, rep)?;
    let std = standardize(&data.x, &data.y)?;
    let sigma_pop = design.population_sigma()?;
    let moments = Moments::from_design(&std);
    cfg.methods
        .iter()
        .map(|method| {
            let (spec, lambda, beta) = match cfg.tuning {
                Tuning::BestPossible => {
                    let specs = method.expand(&cfg.grids);
                    let paths = specs
                        .iter()
                        .map(|s| fit_lenient(s, &moments, &cfg.path))
                        .collect::<Result<Vec<_>>>()?;
                    let best = best_possible_selection(&paths, &design.beta_star)?;
                    let beta = paths[best.path_index].coefficients_at(best.lambda, true)?;
                    (specs[best.path_index], best.lambda, beta)
                }
                Tuning::CrossValidation => {
                    let opts = CvOptions {
                        seed: cv_seed(design.seed, rep),
                        path: cfg.path,
                        ..cfg.cv.clone()
                    };
                    let sel = grid_search_cv(&std, method, &cfg.grids, &opts)?;
                    let path = fit_lenient(&sel.spec_hat, &moments, &cfg.path)?;
                    let beta = path.coefficients_at(sel.lambda_hat, true)?;
                    (sel.spec_hat, sel.lambda_hat, beta)
                }
            };
            let (_, slopes) = std.to_original_scale(&beta);
            let metrics = selection_metrics(&slopes, &design.beta_star)?;
            Ok(ReplicationResult {
                replication: rep,
                method: method.name().to_string(),
                selected_count: metrics.tp + metrics.fp,
                metrics,
                rpe: rpe(&slopes, &design.beta_star, &sigma_pop, design.sigma_noise),
                tuning: TuningChoice {
                    spec,
                    rule: spec.effective_rule(),
                    lambda,
                },
            })
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.design.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("no methods to run".into()));
    }
    let per_rep: Vec<Vec<ReplicationResult>> = (0..cfg.design.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, rep))
        .collect::<Result<_>>()?;
    let replications: Vec<ReplicationResult> = per_rep.into_iter().flatten().collect();
    let summaries = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let rows: Vec<&ReplicationResult> = replications
                .iter()
                .filter(|r| r.method == method.name())
                .collect();
            summarize(method.name(), &rows, cfg.bootstrap, cfg.design.seed.wrapping_add(m as u64))
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentResult {
        design: cfg.design.clone(),
        tuning: cfg.tuning,
        summaries,
        replications,
    })
}

fn summarize(method: &str, rows: &[&ReplicationResult], b: usize, seed: u64) -> Result<MethodSummary> {
    let col = |f: &dyn Fn(&ReplicationResult) -> f64| -> Vec<f64> { rows.iter().map(|r| f(r)).collect() };
    let g = col(&|r| r.metrics.g);
    let rp = col(&|r| r.rpe);
    let se = |v: &[f64], s: u64| -> Result<f64> {
        if v.len() < 2 || b < 2 {
            Ok(0.0)
        } else {
            bootstrap_se_of_median(v, b, s)
        }
    };
    Ok(MethodSummary {
        method: method.to_string(),
        replications: rows.len(),
        median_g: median(&g),
        se_median_g: se(&g, seed)?,
        median_rpe: median(&rp),
        se_median_rpe: se(&rp, seed ^ 1)?,
        median_tp: median(&col(&|r| r.metrics.tp as f64)),
        median_fp: median(&col(&|r| r.metrics.fp as f64)),
        median_sensitivity: median(&col(&|r| r.metrics.sensitivity)),
        median_specificity: median(&col(&|r| r.metrics.specificity)),
        median_selected: median(&col(&|r| r.selected_count as f64)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_examples() {
        let ar = make_sigma(SigmaSpec::Ar { rho: 0.5 }, 3).unwrap();
        let want = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ar.get(i, j), want[i][j]);
            }
        }
        let c = make_sigma(SigmaSpec::Constant { rho: 0.95 }, 3).unwrap();
        assert_eq!((c.get(0, 0), c.get(0, 2)), (1.0, 0.95));
        let g = make_sigma(SigmaSpec::Grouped, 100).unwrap();
        assert_eq!((g.get(0, 1), g.get(10, 11), g.get(0, 10), g.get(20, 21)), (0.15, 0.95, 0.0, 0.0));
        assert_eq!(g.get(14, 14), 1.0);
    }

    #[test]
    fn sigma_errors() {
        assert!(matches!(make_sigma(SigmaSpec::Ar { rho: 1.0 }, 3), Err(Error::InvalidRho(_))));
        assert!(matches!(
            make_sigma(SigmaSpec::Constant { rho: -0.6 }, 3),
            Err(Error::NotPsd(_))
        ));
        assert!(make_sigma(SigmaSpec::Constant { rho: -0.5 }, 3).is_ok());
        assert!(make_sigma(SigmaSpec::Identity, 1).is_err());
    }

    #[test]
    fn presets_are_symmetric_and_positive_definite() {
        for name in PRESETS {
            let d = SimulationDesign::preset(name, 20).unwrap();
            let s = d.population_sigma().unwrap();
            assert_eq!(s.as_matrix(), &s.as_matrix().transpose());
            assert!(Cholesky::new(s.into_matrix()).is_some());
        }
        let mut d = SimulationDesign::example3(20);
        d.latent_grouped = true;
        assert!(Cholesky::new(d.population_sigma().unwrap().into_matrix()).is_some());
    }

    #[test]
    fn latent_construction_has_the_stated_correlations() {
        let s = latent_grouped_sigma(20).unwrap();
        let corr = |i: usize, j: usize| s.get(i, j) / (s.get(i, i) * s.get(j, j)).sqrt();
        assert!((corr(0, 1) - 0.15).abs() < 1e-15);
        assert!((corr(10, 11) - 0.95).abs() < 1e-15);
        assert_eq!(corr(0, 10), 0.0);
    }

    #[test]
    fn preset_parameters() {
        let d = SimulationDesign::example1(20);
        assert_eq!((d.p, d.sigma_noise), (100, 9.0));
        assert_eq!(d.beta_star.iter().filter(|b| **b == 3.0).count(), 5);
        assert_eq!(&d.beta_star[10..15], &[1.5; 5]);
        let d = SimulationDesign::example2(20);
        assert_eq!(&d.beta_star[10..20], &[3.0; 10]);
        assert_eq!(&d.beta_star[30..40], &[1.5; 10]);
        assert_eq!(d.beta_star.iter().filter(|b| **b != 0.0).count(), 20);
        let d = SimulationDesign::intro(10);
        assert!((d.snr().unwrap() - 1.0).abs() < 1e-15);
        assert!(SimulationDesign::preset("nope", 10).is_err());
    }

    #[test]
    fn snr_values() {
        // AR(0.5): sum of 0.5^|i-j| over the two blocks and their cross terms
        let ex1 = SimulationDesign::example1(20).snr().unwrap();
        let mut q = 0.0;
        let b = SimulationDesign::example1(20).beta_star;
        for i in 0..100 {
            for j in 0..100 {
                q += b[i] * b[j] * 0.5f64.powi(i.abs_diff(j) as i32);
            }
        }
        assert!((ex1 - q / 81.0).abs() < 1e-12);
        assert!((ex1 - 1.55).abs() < 0.01);
        // constant correlation: (1−ρ)‖β‖² + ρ(Σβ)²
        let ex2 = SimulationDesign::example2(20).snr().unwrap();
        let closed = (0.05 * (10.0 * 9.0 + 10.0 * 2.25) + 0.95 * 45.0f64.powi(2)) / 225.0;
        assert!((ex2 - closed).abs() < 1e-12);
        assert!((ex2 - 8.58).abs() < 0.01);
    }

    #[test]
    fn data_shapes_and_determinism() {
        let d = SimulationDesign::example1(15);
        let (x, y) = gen_data(&d, 3).unwrap();
        assert_eq!((x.nrows(), x.ncols(), y.len()), (15, 100, 15));
        let again = gen_data(&d, 3).unwrap();
        assert_eq!(x, again.0);
        assert_eq!(y, again.1);
        assert_ne!(x, gen_data(&d, 4).unwrap().0);
    }

    #[test]
    fn identity_rows_are_nearly_uncorrelated() {
        let mut d = SimulationDesign::intro(10_000);
        d.p = 5;
        d.beta_star = vec![1.0, 0.0, 0.0, 0.0, 0.0];
        let (x, _) = gen_data(&d, 0).unwrap();
        let cov = x.transpose() * &x / 10_000.0;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(cov[(i, j)].abs() < 0.05);
                }
            }
        }
    }

    #[test]
    fn ar_draws_match_population_covariance() {
        let mut d = SimulationDesign::example1(20_000);
        d.p = 4;
        d.beta_star = vec![1.0, 0.0, 0.0, 0.0];
        let (x, _) = gen_data(&d, 1).unwrap();
        let cov = x.transpose() * &x / 20_000.0;
        for i in 0..4 {
            for j in 0..4 {
                assert!((cov[(i, j)] - 0.5f64.powi(i.abs_diff(j) as i32)).abs() < 0.05);
            }
        }
    }

    #[test]
    fn noiseless_orthogonal_pair_is_recovered() {
        let design = SimulationDesign {
            name: "pair".into(),
            p: 2,
            n: 50,
            beta_star: vec![2.0, 0.0],
            sigma_spec: SigmaSpec::Identity,
            sigma_noise: 1e-300,
            replications: 1,
            seed: 5,
            latent_grouped: false,
        };
        let cfg = ExperimentConfig::new(design, vec![EstimatorSpec::lasso()], Tuning::BestPossible);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.summaries[0].median_g, 1.0);
        assert_eq!(res.replications[0].selected_count, 1);
    }

    #[test]
    fn replication_order_does_not_matter() {
        let mut design = SimulationDesign::intro(20);
        design.replications = 4;
        let cfg = ExperimentConfig::new(
            design,
            vec![EstimatorSpec::lasso(), EstimatorSpec::ust()],
            Tuning::BestPossible,
        );
        let all = run_experiment(&cfg).unwrap();
        let rev: Vec<ReplicationResult> = (0..4).rev().flat_map(|r| run_replication(&cfg, r).unwrap()).collect();
        for r in &all.replications {
            assert!(rev.contains(r));
        }
        assert_eq!(all, run_experiment(&cfg).unwrap());
    }

    #[test]
    fn cv_experiment_runs() {
        let mut design = SimulationDesign::example1(30);
        design.replications = 2;
        let mut cfg = ExperimentConfig::new(
            design,
            vec![EstimatorSpec::ct_lasso(ThresholdRule::soft(0.0))],
            Tuning::CrossValidation,
        );
        cfg.grids.nu = vec![0.0, 0.4];
        cfg.bootstrap = 50;
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.replications.len(), 2);
        for r in &res.replications {
            assert_eq!(r.selected_count, r.metrics.tp + r.metrics.fp);
            assert!(r.rpe >= 0.0);
        }
    }
}
