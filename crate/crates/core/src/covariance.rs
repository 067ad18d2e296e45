//! Sample covariance construction and covariance-regularizing operators.
//!
//! Everything here works on the correlation scale: designs are centered and
//! scaled so that every column has mean square one (divisor `n`), which makes
//! the sample covariance matrix a correlation matrix with unit diagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered response and column-standardized predictors, plus the affine
/// metadata needed to map coefficients back to the original units.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedDesign {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    pub y_mean: f64,
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Marginal correlations `Xᵀy / n`.
    pub fn xty(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.p())
            .map(|j| self.x.column(j).dot(&self.y) / n)
            .collect()
    }

    /// Map standardized coefficients back to original units, returning
    /// `(intercept, slopes)`.
    pub fn to_original_scale(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = beta
            .iter()
            .zip(&self.column_scales)
            .map(|(b, s)| b / s)
            .collect();
        let shift: f64 = slopes
            .iter()
            .zip(&self.column_means)
            .map(|(b, m)| b * m)
            .sum();
        (self.y_mean - shift, slopes)
    }

    /// Apply this design's column transform to new raw rows.
    pub fn transform_rows(&self, raw_x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw_x.ncols() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: raw_x.ncols(),
            });
        }
        let mut out = raw_x.clone();
        for j in 0..self.p() {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            out.column_mut(j).apply(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }

    /// Predict responses in original units for raw rows.
    pub fn predict_raw(&self, raw_x: &DMatrix<f64>, beta: &[f64]) -> Result<Vec<f64>> {
        let z = self.transform_rows(raw_x)?;
        let b = DVector::from_column_slice(beta);
        Ok((z * b).iter().map(|v| v + self.y_mean).collect())
    }
}

/// Center `raw_y` and center/scale every column of `raw_x` to mean square one.
pub fn standardize(raw_x: &DMatrix<f64>, raw_y: &[f64]) -> Result<StandardizedDesign> {
    let (n, p) = raw_x.shape();
    if raw_y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: raw_y.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mut x = raw_x.clone();
    let mut column_means = Vec::with_capacity(p);
    let mut column_scales = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = x.column_mut(j);
        let mean = col.sum() / nf;
        col.add_scalar_mut(-mean);
        let scale = (col.norm_squared() / nf).sqrt();
        if !(scale > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::ConstantColumn(j));
        }
        col /= scale;
        column_means.push(mean);
        column_scales.push(scale);
    }
    let y_mean = raw_y.iter().sum::<f64>() / nf;
    let y = DVector::from_iterator(n, raw_y.iter().map(|v| v - y_mean));
    Ok(StandardizedDesign {
        x,
        y,
        column_means,
        column_scales,
        y_mean,
    })
}

/// Symmetric `p × p` covariance (or correlation) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
}

impl CovMatrix {
    /// Wrap a square matrix, mirroring the upper triangle onto the lower one
    /// so the result is exactly symmetric.
    pub fn from_matrix(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let p = m.nrows();
        for j in 0..p {
            for i in (j + 1)..p {
                m[(i, j)] = m[(j, i)];
            }
        }
        Ok(Self { entries: m })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            entries: DMatrix::identity(p, p),
        }
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Largest off-diagonal magnitude.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let p = self.p();
        let mut best = 0.0f64;
        for j in 0..p {
            for i in 0..j {
                best = best.max(self.entries[(i, j)].abs());
            }
        }
        best
    }

    /// Principal submatrix on `rows × cols`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            self.entries[(rows[a], cols[b])]
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let p = self.p();
        let mut out = vec![0.0; p];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let col = self.entries.column(j);
            for (o, c) in out.iter_mut().zip(col.iter()) {
                *o += c * vj;
            }
        }
        out
    }

    fn check_indices(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.p()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: self.p(),
            });
        }
        Ok(())
    }
}

/// `σ̂_ij = (1/n) Σ_k x_ki x_kj`.
pub fn sample_covariance(design: &StandardizedDesign) -> CovMatrix {
    let n = design.n() as f64;
    let gram = design.x.tr_mul(&design.x) / n;
    CovMatrix::from_matrix(gram).expect("gram matrix is square")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThresholdKind {
    Identity,
    Hard,
    Soft,
    Adaptive,
    ElasticNet,
}

/// A covariance-regularizing operator applied to off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub kind: ThresholdKind,
    pub nu: f64,
    pub gamma: f64,
    pub lambda2: f64,
}

impl Default for ThresholdRule {
    fn default() -> Self {
        Self::identity()
    }
}

impl ThresholdRule {
    pub fn identity() -> Self {
        Self {
            kind: ThresholdKind::Identity,
            nu: 0.0,
            gamma: 0.0,
            lambda2: 0.0,
        }
    }

    pub fn hard(nu: f64) -> Self {
        Self {
            kind: ThresholdKind::Hard,
            nu,
            ..Self::identity()
        }
    }

    pub fn soft(nu: f64) -> Self {
        Self {
            kind: ThresholdKind::Soft,
            nu,
            ..Self::identity()
        }
    }

    pub fn adaptive(nu: f64, gamma: f64) -> Self {
        Self {
            kind: ThresholdKind::Adaptive,
            nu,
            gamma,
            ..Self::identity()
        }
    }

    pub fn elastic_net(lambda2: f64) -> Self {
        Self {
            kind: ThresholdKind::ElasticNet,
            lambda2,
            ..Self::identity()
        }
    }

    /// Hard thresholding at the largest level below one. Zeroes every
    /// off-diagonal correlation of magnitude < 1, giving the univariate
    /// soft-thresholding limit.
    pub fn complete() -> Self {
        Self::hard(1.0 - f64::EPSILON / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.nu) {
            return Err(Error::InvalidParameter(format!(
                "nu must lie in [0, 1), got {}",
                self.nu
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda2 must be >= 0, got {}",
                self.lambda2
            )));
        }
        Ok(())
    }

    /// The operator applied to a single off-diagonal covariance.
    pub fn apply_scalar(&self, v: f64) -> f64 {
        match self.kind {
            ThresholdKind::Identity => v,
            ThresholdKind::Hard => {
                if v.abs() > self.nu {
                    v
                } else {
                    0.0f64.copysign(v)
                }
            }
            ThresholdKind::Soft => (v.abs() - self.nu).max(0.0).copysign(v),
            ThresholdKind::Adaptive => {
                let a = v.abs();
                if a <= self.nu {
                    // covers v == 0, where |v|^-gamma is singular
                    0.0f64.copysign(v)
                } else {
                    let shrink = self.nu * (self.nu / a).powf(self.gamma);
                    (a - shrink).max(0.0).copysign(v)
                }
            }
            ThresholdKind::ElasticNet => (v + self.lambda2) / (1.0 + self.lambda2),
        }
    }

    /// Short label used in reports, e.g. `soft(nu=0.3)`.
    pub fn label(&self) -> String {
        match self.kind {
            ThresholdKind::Identity => "identity".to_string(),
            ThresholdKind::Hard => format!("hard(nu={})", self.nu),
            ThresholdKind::Soft => format!("soft(nu={})", self.nu),
            ThresholdKind::Adaptive => format!("adaptive(nu={},gamma={})", self.nu, self.gamma),
            ThresholdKind::ElasticNet => format!("elastic_net(lambda2={})", self.lambda2),
        }
    }
}

/// Apply `rule` entry-wise to the off-diagonal of `cov`; the diagonal is kept.
pub fn apply_threshold(cov: &CovMatrix, rule: &ThresholdRule) -> CovMatrix {
    if rule.kind == ThresholdKind::Identity {
        return cov.clone();
    }
    let p = cov.p();
    let mut out = cov.entries.clone();
    for j in 0..p {
        for i in 0..j {
            let v = rule.apply_scalar(cov.entries[(i, j)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    CovMatrix { entries: out }
}

/// Smallest eigenvalue of the principal submatrix on `subset`.
pub fn min_eigenvalue(cov: &CovMatrix, subset: &[usize]) -> Result<f64> {
    cov.check_indices(subset)?;
    Ok(min_eigenvalue_of(cov.block(subset, subset)))
}

/// `+∞` for an empty matrix.
pub(crate) fn min_eigenvalue_of(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    SymmetricEigen::new(m).eigenvalues.min()
}
