use super::Sample;
use crate::error::{capability, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KendallEstimate {
    pub tau: f64,
    /// Tie-adjusted τ_b = (C − D)/√{(N − T_x)(N − T_y)}; equals `tau`
    /// when neither coordinate has ties.
    pub tau_b: f64,
    /// Delete-one jackknife standard error; absent for n < 3.
    pub stderr: Option<f64>,
}

fn sign(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Kendall's τ̂ = 2/{n(n−1)} Σ_{i<j} sign(x_i − x_j)·sign(y_i − y_j), an
/// unbiased estimator of p(s_1, s_2) for max-stable data. Tied pairs
/// contribute zero.
pub fn ecp_kendall(data: &Sample) -> Result<KendallEstimate> {
    if data.k() != 2 {
        return capability(format!("Kendall's tau needs a pair of sites (k={})", data.k()));
    }
    let x = data.column(0);
    let y = data.column(1);
    let n = x.len();
    // per-point concordance sums s_i = Σ_{j≠i} sign·sign, plus tie counts
    let per_point: Vec<(i64, u64, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (xi, yi) = (x[i], y[i]);
            let mut s = 0;
            let (mut tx, mut ty) = (0, 0);
            for (j, (xj, yj)) in x.iter().zip(&y).enumerate() {
                s += sign(xi - xj) * sign(yi - yj);
                if j != i {
                    tx += u64::from(xi == *xj);
                    ty += u64::from(yi == *yj);
                }
            }
            (s, tx, ty)
        })
        .collect();
    let s: Vec<i64> = per_point.iter().map(|v| v.0).collect();
    let total: i64 = s.iter().sum::<i64>() / 2;
    let nf = n as f64;
    let pairs = nf * (nf - 1.0) / 2.0;
    let tau = total as f64 / pairs;
    let tx = per_point.iter().map(|v| v.1).sum::<u64>() as f64 / 2.0;
    let ty = per_point.iter().map(|v| v.2).sum::<u64>() as f64 / 2.0;
    let denom = ((pairs - tx) * (pairs - ty)).sqrt();
    let tau_b = if denom > 0.0 { total as f64 / denom } else { 0.0 };
    let stderr = (n >= 3).then(|| {
        let scale = 2.0 / ((nf - 1.0) * (nf - 2.0));
        let loo: Vec<f64> = s.iter().map(|si| (total - si) as f64 * scale).collect();
        let mean = loo.iter().sum::<f64>() / nf;
        ((nf - 1.0) / nf * loo.iter().map(|t| (t - mean).powi(2)).sum::<f64>()).sqrt()
    });
    Ok(KendallEstimate { tau, tau_b, stderr })
}
