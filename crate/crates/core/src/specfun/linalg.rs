use crate::error::{domain, Error, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Pivots within this (diagonal-scaled) distance of zero are treated as
/// exact zeros, equivalent to a diagonal jitter of at most this size.
const JITTER: f64 = 1e-10;

/// A symmetric positive-semidefinite matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    /// Builds from rows; symmetry must hold exactly.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return domain("covariance matrix must have dim >= 1");
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return domain("covariance matrix must be square");
            }
            entries.extend_from_slice(row);
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return domain("covariance matrix has non-finite entries");
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return domain(format!("covariance matrix not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds `entries[i][j] = f(i, j)` evaluated on the lower triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut rows = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Self::new(rows)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Lower Cholesky factor, row-major. Rank-deficient matrices are
    /// accepted: near-zero pivots produce zero columns.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let scale = (0..n).map(|i| self.get(i, i)).fold(1.0_f64, f64::max);
        let tol = JITTER * scale;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut pivot = self.get(j, j);
            for k in 0..j {
                pivot -= l[j * n + k] * l[j * n + k];
            }
            if pivot < -tol {
                return Err(Error::Numeric(format!(
                    "Cholesky failed: pivot {pivot:e} at column {j} (matrix not PSD)"
                )));
            }
            if pivot <= tol {
                continue;
            }
            let d = pivot.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(l)
    }

    /// Inverse and log-determinant of a positive-definite matrix.
    pub fn inverse_and_log_det(&self) -> Result<(CovarianceMatrix, f64)> {
        let n = self.dim;
        let l = self.cholesky()?;
        let mut log_det = 0.0;
        for i in 0..n {
            let d = l[i * n + i];
            if d == 0.0 {
                return Err(Error::Numeric("matrix is singular".into()));
            }
            log_det += 2.0 * d.ln();
        }
        // columns of L^{-1}
        let mut linv = vec![0.0; n * n];
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in c..i {
                    s -= l[i * n + k] * linv[k * n + c];
                }
                linv[i * n + c] = s / l[i * n + i];
            }
        }
        let inv = CovarianceMatrix::from_fn(n, |i, j| {
            (i.max(j)..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum()
        })?;
        Ok((inv, log_det))
    }

    /// Quadratic form xᵀ A x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.entries[i * n + j] * x[j];
            }
        }
        s
    }
}

impl TryFrom<Vec<Vec<f64>>> for CovarianceMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<CovarianceMatrix> for Vec<Vec<f64>> {
    fn from(m: CovarianceMatrix) -> Self {
        m.rows()
    }
}

/// Zero-mean Gaussian sampler holding a pre-computed Cholesky factor.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    dim: usize,
    lower: Vec<f64>,
}

impl GaussianSampler {
    pub fn new(cov: &CovarianceMatrix) -> Result<Self> {
        Ok(Self {
            dim: cov.dim(),
            lower: cov.cholesky()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes one draw into `out`; `scratch` must have length `dim`.
    pub fn sample_into<R: rand::Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut [f64],
        out: &mut [f64],
    ) {
        let n = self.dim;
        for z in scratch.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i + 1];
            out[i] = row.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum();
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut scratch = vec![0.0; self.dim];
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut scratch, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_ragged() {
        assert!(CovarianceMatrix::new(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(CovarianceMatrix::new(vec![vec![1.0, 0.5], vec![0.5]]).is_err());
        assert!(CovarianceMatrix::new(vec![]).is_err());
    }

    #[test]
    fn cholesky_reconstructs() {
        let c = CovarianceMatrix::new(vec![
            vec![4.0, 2.0, 0.6],
            vec![2.0, 2.0, 0.5],
            vec![0.6, 0.5, 1.0],
        ])
        .unwrap();
        let l = c.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((s - c.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rank_deficient_accepted_negative_rejected() {
        let c = CovarianceMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let l = c.cholesky().unwrap();
        assert_eq!(l, vec![1.0, 0.0, 1.0, 0.0]);
        let bad = CovarianceMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(bad.cholesky(), Err(Error::Numeric(_))));
    }

    #[test]
    fn inverse_round_trip() {
        let c = CovarianceMatrix::new(vec![vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let (inv, log_det) = c.inverse_and_log_det().unwrap();
        assert!((log_det - (2.0 * 0.5 - 0.09_f64).ln()).abs() < 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|k| c.get(i, k) * inv.get(k, j)).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn serde_as_nested_rows() {
        let c = CovarianceMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, "[[1.0,0.0],[0.0,2.0]]");
        let back: CovarianceMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<CovarianceMatrix>("[[1.0,0.1],[0.2,1.0]]").is_err());
    }
}
