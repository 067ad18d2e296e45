use crate::covariance::CovMatrix;

/// Cholesky factor of the active block, grown one variable at a time.
///
/// Rows of `L` are stored packed: row `i` holds `i + 1` entries.
#[derive(Debug, Clone, Default)]
pub(crate) struct ActiveFactor {
    idx: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl ActiveFactor {
    pub(crate) fn len(&self) -> usize {
        self.idx.len()
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.idx
    }

    /// Schur pivot `σ_jj − wᵀw` for appending `j`, together with `w`.
    pub(crate) fn pivot_for(&self, cov: &CovMatrix, j: usize) -> (f64, Vec<f64>) {
        let k = self.idx.len();
        let mut w = Vec::with_capacity(k);
        for (r, row) in self.rows.iter().enumerate() {
            let mut s = cov.get(self.idx[r], j);
            for (c, lc) in row[..r].iter().enumerate() {
                s -= lc * w[c];
            }
            w.push(s / row[r]);
        }
        let d2 = cov.get(j, j) - w.iter().map(|v| v * v).sum::<f64>();
        (d2, w)
    }

    /// Append `j` given a positive pivot from [`pivot_for`].
    pub(crate) fn push_with(&mut self, j: usize, d2: f64, mut w: Vec<f64>) {
        debug_assert!(d2 > 0.0);
        w.push(d2.sqrt());
        self.idx.push(j);
        self.rows.push(w);
    }

    /// Refactor from scratch on `idx`. Returns `None` if a pivot is not
    /// strictly positive.
    pub(crate) fn rebuild(cov: &CovMatrix, idx: &[usize]) -> Option<Self> {
        let mut f = Self::default();
        for &j in idx {
            let (d2, w) = f.pivot_for(cov, j);
            if !(d2 > 0.0) {
                return None;
            }
            f.push_with(j, d2, w);
        }
        Some(f)
    }

    /// Solve `(Σ_A) x = rhs` with `rhs` ordered like [`indices`].
    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let row = &self.rows[i];
            let mut s = rhs[i];
            for c in 0..i {
                s -= row[c] * z[c];
            }
            z[i] = s / row[i];
        }
        for i in (0..k).rev() {
            let mut s = z[i];
            for r in (i + 1)..k {
                s -= self.rows[r][i] * z[r];
            }
            z[i] = s / self.rows[i][i];
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn incremental_matches_dense_solve() {
        let m = DMatrix::from_fn(6, 6, |i, j| 0.6f64.powi((i as i32 - j as i32).abs()));
        let cov = CovMatrix::from_matrix(m.clone()).unwrap();
        let idx = [4, 0, 2, 5];
        let f = ActiveFactor::rebuild(&cov, &idx).unwrap();
        let rhs = [1.0, -1.0, 0.5, 2.0];
        let x = f.solve(&rhs);
        let block = cov.block(&idx, &idx);
        let back = &block * nalgebra::DVector::from_column_slice(&x);
        for i in 0..4 {
            assert!((back[i] - rhs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_block_is_rejected() {
        let cov = CovMatrix::from_matrix(DMatrix::from_element(2, 2, 1.0)).unwrap();
        let f = ActiveFactor::rebuild(&cov, &[0]).unwrap();
        let (d2, _) = f.pivot_for(&cov, 1);
        assert!(d2.abs() < 1e-15);
        assert!(ActiveFactor::rebuild(&cov, &[0, 1]).is_none());
    }
}
