use super::Sample;
use crate::error::{domain, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultivariateLog {
    pub estimate: f64,
    /// n·p̂ − (n − 1)·mean of the delete-one estimates.
    pub jackknife: f64,
    /// Delete-one jackknife standard error.
    pub stderr: f64,
}

/// Log-based estimator
/// p̂ = Σ_{∅≠J⊆S} (−1)^{|J|} n⁻¹ Σ_i log{n⁻¹ #{l : X_l ≤ X_i on J}},
/// bias-corrected by the delete-one jackknife when `jackknife` is set.
pub fn ecp_multivariate_log(data: &Sample, subset: &[usize], jackknife: bool) -> Result<f64> {
    let d = multivariate_log_detail(data, subset)?;
    Ok(if jackknife { d.jackknife } else { d.estimate })
}

/// Plain and jackknifed estimates in one pass over all subsets J.
pub fn multivariate_log_detail(data: &Sample, subset: &[usize]) -> Result<MultivariateLog> {
    if subset.len() < 2 {
        return domain("the log estimator needs at least two sites");
    }
    if subset.len() > 20 {
        return domain("the log estimator enumerates 2^k subsets; k is capped at 20");
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return domain("subset has repeated sites");
    }
    let sub = data.select(subset)?;
    let rows = sub.rows();
    let n = rows.len();
    let nf = n as f64;
    let k = subset.len();

    let mut estimate = 0.0;
    // Σ over J of sign·(n − 1)⁻¹ Σ_{l≠i} log c_l^{(−i)}, per deleted i
    let mut loo_sum = vec![0.0; n];
    for mask in 1u32..(1 << k) {
        let cols: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let sgn = if cols.len().is_multiple_of(2) { 1.0 } else { -1.0 };
        let below = |a: &[f64], b: &[f64]| cols.iter().all(|&j| a[j] <= b[j]);
        // c_l = #{i : X_i ≤ X_l on J}, self included
        let c: Vec<usize> = rows
            .par_iter()
            .map(|xl| rows.iter().filter(|xi| below(xi, xl)).count())
            .collect();
        let logs: Vec<f64> = c.iter().map(|&v| (v as f64).ln()).collect();
        let total: f64 = logs.iter().sum();
        estimate += sgn * (total / nf - nf.ln());

        // removing i lowers c_l by one for every l ≠ i with X_i ≤ X_l
        let a: Vec<f64> = c
            .iter()
            .map(|&v| if v > 1 { (v as f64).ln() - ((v - 1) as f64).ln() } else { 0.0 })
            .collect();
        let drop: Vec<f64> = rows
            .par_iter()
            .enumerate()
            .map(|(i, xi)| {
                rows.iter()
                    .enumerate()
                    .filter(|(l, xl)| *l != i && below(xi, xl))
                    .map(|(l, _)| a[l])
                    .sum()
            })
            .collect();
        for i in 0..n {
            let s = total - logs[i] - drop[i];
            loo_sum[i] += sgn * (s / (nf - 1.0) - (nf - 1.0).ln());
        }
    }
    let mean_loo = loo_sum.iter().sum::<f64>() / nf;
    let var = loo_sum.iter().map(|v| (v - mean_loo).powi(2)).sum::<f64>();
    Ok(MultivariateLog {
        estimate,
        jackknife: nf * estimate - (nf - 1.0) * mean_loo,
        stderr: ((nf - 1.0) / nf * var).sqrt(),
    })
}
