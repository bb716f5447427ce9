//! Concurrence-probability estimators and block-size planning.

mod kendall;
mod mvlog;
mod plan;

pub use kendall::{ecp_kendall, KendallEstimate};
pub use mvlog::{ecp_multivariate_log, multivariate_log_detail, MultivariateLog};
pub use plan::{bias_law_check, block_mse, optimal_block_size, BiasRow, BlockPlan};

use crate::error::{capability, domain, Result};
use crate::simulate::FieldRealization;
use crate::specfun::{log_binom_ratio, SeededRng};
use serde::{Deserialize, Serialize};

/// n observations of a k-dimensional vector, stored row-wise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    rows: Vec<Vec<f64>>,
    names: Vec<String>,
    ties: bool,
}

impl Sample {
    pub fn new(rows: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let k = names.len();
        if rows.len() < 2 || k < 2 {
            return domain(format!("a sample needs n >= 2 and k >= 2 (n={}, k={k})", rows.len()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return domain(format!("row {i} has {} values, expected {k}", r.len()));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return domain(format!("row {i} has a non-finite value"));
            }
        }
        let ties = (0..k).any(|j| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            col.sort_by(f64::total_cmp);
            col.windows(2).any(|w| w[0] == w[1])
        });
        Ok(Self { rows, names, ties })
    }

    /// Columns named `s0, s1, …`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        Self::new(rows, (0..k).map(|j| format!("s{j}")).collect())
    }

    pub fn from_fields(fields: &[FieldRealization]) -> Result<Self> {
        Self::from_rows(fields.iter().map(|f| f.values.clone()).collect())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Some coordinate has repeated values.
    pub fn ties_detected(&self) -> bool {
        self.ties
    }

    /// Restriction to the columns in `cols`.
    pub fn select(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.k()) {
            return domain(format!("column {bad} out of range (k={})", self.k()));
        }
        Self::new(
            self.rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect(),
            cols.iter().map(|&j| self.names[j].clone()).collect(),
        )
    }

    /// Adds uniform noise on ±resolution/2 to every value, breaking ties of
    /// data recorded at that resolution.
    pub fn jittered(&self, resolution: f64, rng: &mut SeededRng) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return domain("jitter resolution must be positive");
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v + resolution * (rng.uniform_open() - 0.5)).collect())
            .collect();
        Self::new(rows, self.names.clone())
    }
}

/// True when `a` is strictly below `b` in every coordinate.
fn strictly_below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// d_i = #{l ≠ i : X_l < X_i componentwise}.
pub fn dominance_counts(data: &Sample) -> Vec<usize> {
    let rows = data.rows();
    rows.iter()
        .map(|xi| rows.iter().filter(|xl| strictly_below(xl, xi)).count())
        .collect()
}

/// Block estimator p̂_m: the share of the ⌊n/m⌋ disjoint blocks (first
/// ⌊n/m⌋·m observations, in order) in which one observation strictly
/// exceeds all others at every site. m = 1 gives 1.
pub fn sample_cp_block(data: &Sample, m: usize) -> Result<f64> {
    let n = data.n();
    if m == 0 || m > n {
        return domain(format!("block size must be in 1..={n}, got {m}"));
    }
    let blocks = n / m;
    let hits = data.rows()[..blocks * m]
        .chunks(m)
        .filter(|block| {
            block.iter().enumerate().any(|(i, xi)| {
                block
                    .iter()
                    .enumerate()
                    .all(|(l, xl)| l == i || strictly_below(xl, xi))
            })
        })
        .count();
    Ok(hits as f64 / blocks as f64)
}

/// Permutation-averaged block estimator p̂*_m = Σ_i C(d_i, m−1)/C(n, m).
pub fn sample_cp_bootstrap(data: &Sample, m: usize) -> Result<f64> {
    bootstrap_from_counts(&dominance_counts(data), m)
}

pub(crate) fn bootstrap_from_counts(d: &[usize], m: usize) -> Result<f64> {
    let n = d.len();
    if m < 2 || m > n {
        return domain(format!("block size must be in 2..={n}, got {m}"));
    }
    let mut total = 0.0;
    for &di in d {
        total += log_binom_ratio(di, m, n)?;
    }
    Ok(total)
}

/// p̃*_m = (m·p̂*_m − 1)/(m − 1), unbiased for p when k = 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnbiasedCp {
    /// May fall below 0.
    pub raw: f64,
    pub clipped: f64,
    pub bootstrap: f64,
}

pub fn sample_cp_unbiased(data: &Sample, m: usize) -> Result<UnbiasedCp> {
    if data.k() != 2 {
        return capability(format!("the unbiased block estimator is bivariate only (k={})", data.k()));
    }
    let bootstrap = sample_cp_bootstrap(data, m)?;
    Ok(unbiased_from_bootstrap(bootstrap, m))
}

pub(crate) fn unbiased_from_bootstrap(bootstrap: f64, m: usize) -> UnbiasedCp {
    let m = m as f64;
    let raw = (m * bootstrap - 1.0) / (m - 1.0);
    UnbiasedCp {
        raw,
        clipped: raw.clamp(0.0, 1.0),
        bootstrap,
    }
}
