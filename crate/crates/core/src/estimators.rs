//! Estimators built on the path solver: lasso, covariance-thresholded lasso,
//! univariate soft thresholding (UST), adaptive lasso and the elastic-net
//! covariance operator.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covariance::{
    apply_threshold, sample_covariance, CovMatrix, StandardizedDesign, ThresholdKind,
    ThresholdRule,
};
use crate::error::{Error, Result};
use crate::path::{ct_lars_cov, PathOptions, SolutionPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Lasso,
    CtLasso,
    Ust,
    AdaptiveLasso,
    ElasticNet,
}

/// A method together with its tuning parameters (other than λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub method: Method,
    pub rule: ThresholdRule,
    /// Adaptive-lasso weight exponent.
    pub gamma_weights: f64,
}

impl EstimatorSpec {
    pub fn lasso() -> Self {
        Self {
            method: Method::Lasso,
            rule: ThresholdRule::identity(),
            gamma_weights: 0.0,
        }
    }

    pub fn ct_lasso(rule: ThresholdRule) -> Self {
        Self {
            method: Method::CtLasso,
            rule,
            gamma_weights: 0.0,
        }
    }

    pub fn ust() -> Self {
        Self {
            method: Method::Ust,
            rule: ThresholdRule::complete(),
            gamma_weights: 0.0,
        }
    }

    pub fn adaptive_lasso(gamma: f64) -> Self {
        Self {
            method: Method::AdaptiveLasso,
            rule: ThresholdRule::identity(),
            gamma_weights: gamma,
        }
    }

    pub fn elastic_net(lambda2: f64) -> Self {
        Self {
            method: Method::ElasticNet,
            rule: ThresholdRule::elastic_net(lambda2),
            gamma_weights: 0.0,
        }
    }

    /// The rule actually handed to the path solver. Lasso is the
    /// covariance-thresholded lasso under the identity operator.
    pub fn effective_rule(&self) -> ThresholdRule {
        match self.method {
            Method::Lasso | Method::AdaptiveLasso => ThresholdRule::identity(),
            Method::Ust => ThresholdRule::complete(),
            Method::CtLasso | Method::ElasticNet => self.rule,
        }
    }

    pub fn fit_path(&self, design: &StandardizedDesign, opts: &PathOptions) -> Result<SolutionPath> {
        self.fit_moments(&Moments::from_design(design), opts)
    }

    /// Fit from precomputed second moments; lets tuning loops share `Σ̂`.
    pub fn fit_moments(&self, m: &Moments, opts: &PathOptions) -> Result<SolutionPath> {
        match self.method {
            Method::Ust => ct_lars_cov(
                &CovMatrix::identity(m.cov.p()),
                &m.xty,
                m.n,
                ThresholdRule::complete(),
                opts,
            ),
            Method::AdaptiveLasso => adaptive_from_moments(m, self.gamma_weights, opts),
            _ => {
                let rule = self.effective_rule();
                rule.validate()?;
                ct_lars_cov(&apply_threshold(&m.cov, &rule), &m.xty, m.n, rule, opts)
            }
        }
    }

    /// Expand this spec over the parameter grids it uses: `ν` for
    /// hard/soft/adaptive thresholding (and `γ` for adaptive), `γ` for the
    /// adaptive lasso, `λ2` for the elastic net.
    pub fn expand(&self, grids: &TuningGrids) -> Vec<EstimatorSpec> {
        match self.method {
            Method::Lasso | Method::Ust => vec![*self],
            Method::AdaptiveLasso => grids
                .gamma
                .iter()
                .map(|&g| Self::adaptive_lasso(g))
                .collect(),
            Method::ElasticNet => grids.lambda2.iter().map(|&l| Self::elastic_net(l)).collect(),
            Method::CtLasso => match self.rule.kind {
                ThresholdKind::Identity | ThresholdKind::ElasticNet => vec![*self],
                ThresholdKind::Hard => grids.nu.iter().map(|&nu| Self::ct_lasso(ThresholdRule::hard(nu))).collect(),
                ThresholdKind::Soft => grids.nu.iter().map(|&nu| Self::ct_lasso(ThresholdRule::soft(nu))).collect(),
                ThresholdKind::Adaptive => grids
                    .nu
                    .iter()
                    .flat_map(|&nu| {
                        grids
                            .gamma
                            .iter()
                            .map(move |&g| Self::ct_lasso(ThresholdRule::adaptive(nu, g)))
                    })
                    .collect(),
            },
        }
    }

    /// Short name used on the command line and in result tables.
    pub fn name(&self) -> &'static str {
        match (self.method, self.rule.kind) {
            (Method::Lasso, _) => "lasso",
            (Method::Ust, _) => "ust",
            (Method::AdaptiveLasso, _) => "adaptive-lasso",
            (Method::ElasticNet, _) => "elastic-net",
            (Method::CtLasso, ThresholdKind::Hard) => "ct-hard",
            (Method::CtLasso, ThresholdKind::Soft) => "ct-soft",
            (Method::CtLasso, ThresholdKind::Adaptive) => "ct-adapt",
            (Method::CtLasso, ThresholdKind::ElasticNet) => "ct-elastic-net",
            (Method::CtLasso, ThresholdKind::Identity) => "ct-identity",
        }
    }

    /// Parameter description, e.g. `soft(nu=0.3)` or `gamma=1`.
    pub fn describe(&self) -> String {
        match self.method {
            Method::AdaptiveLasso => format!("gamma={}", self.gamma_weights),
            Method::Lasso => "identity".to_string(),
            Method::Ust => "complete".to_string(),
            _ => self.rule.label(),
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    /// Parses a method name. Grid-tuned parameters start at their neutral
    /// values and are overwritten by the caller or by [`EstimatorSpec::expand`].
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lasso" => Self::lasso(),
            "ust" => Self::ust(),
            "adaptive-lasso" | "adapt-lasso" => Self::adaptive_lasso(1.0),
            "elastic-net" | "enet" => Self::elastic_net(0.0),
            "ct-hard" => Self::ct_lasso(ThresholdRule::hard(0.0)),
            "ct-soft" => Self::ct_lasso(ThresholdRule::soft(0.0)),
            "ct-adapt" | "ct-adaptive" => Self::ct_lasso(ThresholdRule::adaptive(0.0, 0.0)),
            other => {
                return Err(Error::InvalidParameter(format!("unknown method '{other}'")))
            }
        })
    }
}

/// Grids for the non-λ tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrids {
    pub nu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl Default for TuningGrids {
    fn default() -> Self {
        let mut nu: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        nu.push(ThresholdRule::complete().nu);
        Self {
            nu,
            gamma: vec![0.0, 0.5, 1.0, 2.0],
            lambda2: vec![0.0, 0.5, 1.5, 4.0],
        }
    }
}

/// Second moments of a standardized design: `Σ̂`, `Xᵀy/n` and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub cov: CovMatrix,
    pub xty: Vec<f64>,
    pub n: usize,
}

impl Moments {
    pub fn from_design(design: &StandardizedDesign) -> Self {
        Self {
            cov: sample_covariance(design),
            xty: design.xty(),
            n: design.n(),
        }
    }
}

/// Univariate soft thresholding of the marginal correlations.
pub fn ust_fit(design: &StandardizedDesign, lambda: f64) -> Vec<f64> {
    design
        .xty()
        .into_iter()
        .map(|r| (r.abs() - lambda).max(0.0).copysign(r))
        .map(|b| if b == 0.0 { 0.0 } else { b })
        .collect()
}

pub fn lasso_path(design: &StandardizedDesign, opts: &PathOptions) -> Result<SolutionPath> {
    EstimatorSpec::lasso().fit_path(design, opts)
}

pub fn ust_path(design: &StandardizedDesign, opts: &PathOptions) -> Result<SolutionPath> {
    EstimatorSpec::ust().fit_path(design, opts)
}

/// Adaptive lasso with univariate initial estimates `β̂₀ = Xᵀy/n`: column `j`
/// is scaled by `|β̂₀_j|^γ`, the lasso path is computed on the reweighted
/// problem, and coefficients are scaled back.
pub fn adaptive_lasso_path(
    design: &StandardizedDesign,
    gamma: f64,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    adaptive_from_moments(&Moments::from_design(design), gamma, opts)
}

fn adaptive_from_moments(m: &Moments, gamma: f64, opts: &PathOptions) -> Result<SolutionPath> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return ct_lars_cov(&m.cov, &m.xty, m.n, ThresholdRule::identity(), opts);
    }
    if let Some(j) = m.xty.iter().position(|r| r.abs() < 1e-14) {
        return Err(Error::ZeroInitialEstimate(j));
    }
    let w: Vec<f64> = m.xty.iter().map(|r| r.abs().powf(gamma)).collect();
    let p = w.len();
    let weighted = DMatrix::from_fn(p, p, |i, j| m.cov.get(i, j) * w[i] * w[j]);
    let cov_w = CovMatrix::from_matrix(weighted)?;
    let xty_w: Vec<f64> = m.xty.iter().zip(&w).map(|(r, wj)| r * wj).collect();
    let mut path = ct_lars_cov(&cov_w, &xty_w, m.n, ThresholdRule::identity(), opts)?;
    for bp in &mut path.breakpoints {
        for (b, wj) in bp.beta.iter_mut().zip(&w) {
            *b *= wj;
        }
    }
    Ok(path)
}

pub fn elastic_net_path(
    design: &StandardizedDesign,
    lambda2: f64,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    EstimatorSpec::elastic_net(lambda2).fit_path(design, opts)
}
