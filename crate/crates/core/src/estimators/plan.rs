use super::{sample_cp_block, Sample};
use crate::error::{domain, Result};
use crate::models::{kendall_target_p, ModelSpec, SiteSet};
use crate::simulate::{simulate_fields, SimControl};
use crate::specfun::stats::mean_se;
use crate::specfun::SeededRng;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub m: usize,
    pub n: usize,
    pub assumed_r: u32,
    pub assumed_c_r: f64,
    pub assumed_p: f64,
    pub predicted_mse: f64,
}

/// MSE(p̂_m) = (c_r/m^r)² + p_m(1 − p_m)/⌊n/m⌋ with p_m = p + c_r/m^r.
pub fn block_mse(n: usize, m: usize, p: f64, r: u32, c_r: f64) -> f64 {
    let bias = c_r / (m as f64).powi(r as i32);
    let pm = (p + bias).min(1.0);
    bias * bias + pm * (1.0 - pm) / (n / m) as f64
}

/// m = round[{2 r c_r² n/(p(1 − p))}^{1/(2r+1)}], clamped to [2, n].
pub fn optimal_block_size(n: usize, p: f64, r: u32, c_r: f64) -> Result<BlockPlan> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("no optimal block size for p = {p}; need 0 < p < 1"));
    }
    if r == 0 || !(c_r > 0.0 && c_r.is_finite()) {
        return domain("need r >= 1 and c_r > 0");
    }
    if n < 2 {
        return domain("need n >= 2");
    }
    let raw = (2.0 * r as f64 * c_r * c_r * n as f64 / (p * (1.0 - p))).powf(1.0 / (2 * r + 1) as f64);
    let m = (raw.round() as usize).clamp(2, n);
    Ok(BlockPlan {
        m,
        n,
        assumed_r: r,
        assumed_c_r: c_r,
        assumed_p: p,
        predicted_mse: block_mse(n, m, p, r, c_r),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub m: usize,
    pub mean: f64,
    pub stderr: f64,
    /// p + (1 − p)/m.
    pub theory: f64,
}

/// Replicate means of p̂_m on `reps` simulated samples of size `n` from a
/// bivariate model, against the law p_m = p + (1 − p)/m.
pub fn bias_law_check(
    model: &ModelSpec,
    sites: &SiteSet,
    m_list: &[usize],
    n: usize,
    reps: usize,
    rng: &mut SeededRng,
) -> Result<Vec<BiasRow>> {
    if sites.len() != 2 {
        return domain("bias law check needs exactly two sites");
    }
    if reps < 2 {
        return domain("need at least two replicates");
    }
    if let Some(&m) = m_list.iter().find(|&&m| m == 0 || m > n) {
        return domain(format!("block size {m} outside 1..={n}"));
    }
    let p = kendall_target_p(model, sites.site(0), sites.site(1))?;
    let base = SeededRng::new(rng.seed(), rng.next_u64());
    let ctrl = SimControl::default();
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rr = base.derive(r);
            let fields = simulate_fields(model, sites, n, &ctrl, &mut rr)?;
            let sample = Sample::from_fields(&fields)?;
            m_list.iter().map(|&m| sample_cp_block(&sample, m)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(m_list
        .iter()
        .enumerate()
        .map(|(c, &m)| {
            let col: Vec<f64> = per_rep.iter().map(|r| r[c]).collect();
            let (mean, stderr) = mean_se(&col);
            BiasRow {
                m,
                mean,
                stderr,
                theory: p + (1.0 - p) / m as f64,
            }
        })
        .collect())
}
