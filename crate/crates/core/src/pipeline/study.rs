use crate::concurrence::{ecp_mc, pairwise_p};
use crate::error::{domain, Result};
use crate::estimators::{
    dominance_counts, ecp_kendall, optimal_block_size, block_mse, sample_cp_block, Sample,
};
use crate::estimators::{bootstrap_from_counts, unbiased_from_bootstrap};
use crate::models::{CorrelationSpec, ModelSpec, SiteSet, VariogramSpec};
use crate::simulate::{DoaSampler, MaxStableSimulator, SimControl};
use crate::specfun::SeededRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Simulation-study configuration. Unset lists fall back to the full study
/// design; `reps` defaults to a scaled-down 200.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// One of `fig1`, `fig2`, `fig3`, `table1`.
    pub experiment: String,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    /// fig1 block sizes.
    #[serde(default)]
    pub m_list: Option<Vec<usize>>,
    /// Fixed block size for fig3/table1 (default 10).
    #[serde(default)]
    pub m: Option<usize>,
    /// Storm counts of the domain-of-attraction sampler; `null` = max-stable.
    #[serde(default)]
    pub n0_list: Option<Vec<Option<usize>>>,
    #[serde(default)]
    pub p_list: Option<Vec<f64>>,
    #[serde(default)]
    pub h_list: Option<Vec<f64>>,
    /// Antithetic draws per ecp_mc call in the lag bisection.
    #[serde(default = "default_lag_draws")]
    pub lag_draws: u64,
}

fn default_reps() -> usize {
    200
}

fn default_lag_draws() -> u64 {
    200_000
}

impl StudyConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            reps: default_reps(),
            seed: 0,
            n_list: None,
            m_list: None,
            m: None,
            n0_list: None,
            p_list: None,
            h_list: None,
            lag_draws: default_lag_draws(),
        }
    }
}

/// Summary of one estimator over the replicates of one design cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub model: String,
    pub n: usize,
    /// Storms of the domain-of-attraction sampler; empty = max-stable.
    pub n0: Option<usize>,
    pub h: f64,
    /// Extremal concurrence probability at lag h.
    pub p: f64,
    pub m: Option<usize>,
    pub estimator: String,
    pub mean: f64,
    pub sd: f64,
    pub rmse: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// √MSE predicted for p̂_m (fig1).
    pub predicted_rmse: Option<f64>,
    /// The planner's block size for this n (fig1).
    pub optimal_m: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub schema_version: u32,
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
}

pub fn extremal_t_study_model() -> ModelSpec {
    ModelSpec::ExtremalT {
        correlation: CorrelationSpec::Exponential { range: 10.0 },
        nu: 5.0,
    }
}

pub fn brown_resnick_study_model(scale: f64) -> ModelSpec {
    ModelSpec::BrownResnick {
        variogram: VariogramSpec::Fractional { c: 1.0 / scale, beta: 1.0 },
    }
}

/// Lag h with p(0, h) = target, by bisection on ecp_mc with common random
/// numbers (every evaluation reuses `seed`). p must decrease in h.
pub fn find_lag(model: &ModelSpec, target: f64, draws: u64, seed: u64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return domain(format!("target probability must be in (0,1), got {target}"));
    }
    let p = |h: f64| -> Result<f64> {
        let sites = SiteSet::line(&[0.0, h])?;
        Ok(ecp_mc(model, &sites, draws, true, &mut SeededRng::new(seed, 0))?.value)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while p(hi)? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return domain(format!("p(h) does not fall to {target}"));
        }
    }
    while hi - lo > 1e-7 * hi.max(1e-3) {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        if p(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

enum Source {
    Exact(MaxStableSimulator),
    Doa(DoaSampler),
}

impl Source {
    fn new(model: &ModelSpec, sites: &SiteSet, n0: Option<usize>) -> Result<Self> {
        Ok(match n0 {
            None => Source::Exact(MaxStableSimulator::new(model, sites, &SimControl::default())?),
            Some(n0) => Source::Doa(DoaSampler::new(model, sites, n0)?),
        })
    }

    fn sample(&self, n: usize, rng: &mut SeededRng) -> Result<Sample> {
        let rows = (0..n)
            .map(|_| match self {
                Source::Exact(s) => s.draw(rng).values,
                Source::Doa(s) => s.draw(rng),
            })
            .collect();
        Sample::from_rows(rows)
    }
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

struct Cell<'a> {
    model: &'a str,
    n: usize,
    n0: Option<usize>,
    h: f64,
    p: f64,
    m: Option<usize>,
}

fn summarize(cell: &Cell, estimator: &str, xs: &[f64]) -> StudyRow {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    let rmse = (xs.iter().map(|x| (x - cell.p).powi(2)).sum::<f64>() / k).sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    StudyRow {
        model: cell.model.to_string(),
        n: cell.n,
        n0: cell.n0,
        h: cell.h,
        p: cell.p,
        m: cell.m,
        estimator: estimator.to_string(),
        mean,
        sd,
        rmse,
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        predicted_rmse: None,
        optimal_m: None,
    }
}

/// Runs `reps` replicates of `f` on substreams of cell `cell_id`.
fn replicate<T: Send>(
    seed: u64,
    cell_id: u64,
    reps: usize,
    f: impl Fn(&mut SeededRng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let base = SeededRng::new(seed, 0x5EED).derive(cell_id);
    (0..reps as u64)
        .into_par_iter()
        .map(|r| f(&mut base.derive(r)))
        .collect()
}

/// Estimator triple (p̂*_m, p̃*_m, p̂) of one sample; p̂ is the tie-adjusted
/// Kendall τ_b, which equals τ̂ for continuous data.
fn triple(sample: &Sample, m: usize) -> Result<[f64; 3]> {
    let star = bootstrap_from_counts(&dominance_counts(sample), m)?;
    Ok([star, unbiased_from_bootstrap(star, m).raw, ecp_kendall(sample)?.tau_b])
}

const TRIPLE_NAMES: [&str; 3] = ["p_star_m", "p_tilde_m", "p_hat"];

/// Runs the experiment named in `cfg`. Output is deterministic for a fixed
/// configuration, independent of the thread count.
pub fn study_harness(cfg: &StudyConfig) -> Result<StudyTable> {
    if cfg.reps < 2 {
        return domain("need at least two replicates");
    }
    let rows = match cfg.experiment.as_str() {
        "fig1" => fig1(cfg)?,
        "fig2" => fig2(cfg)?,
        "fig3" => fig3(cfg)?,
        "table1" => table1(cfg)?,
        other => return domain(format!("unknown experiment '{other}' (fig1, fig2, fig3, table1)")),
    };
    Ok(StudyTable {
        schema_version: crate::SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
    })
}

fn fig1(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let model = brown_resnick_study_model(1.627);
    let h = 1.0;
    let sites = SiteSet::line(&[0.0, h])?;
    let p = pairwise_p(&model, &sites)?;
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![100, 500, 1000]);
    let m_list = cfg.m_list.clone().unwrap_or_else(|| (2..=30).collect());
    let source = Source::new(&model, &sites, None)?;
    let mut rows = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        // one set of samples per n, shared by every block size
        let samples = replicate(cfg.seed, ni as u64, cfg.reps, |rng| source.sample(n, rng))?;
        let counts: Vec<Vec<usize>> = samples.par_iter().map(dominance_counts).collect();
        let opt = optimal_block_size(n, p, 1, 1.0 - p)?.m;
        for &m in m_list.iter().filter(|&&m| m >= 2 && m <= n) {
            let cell = Cell {
                model: "brown_resnick",
                n,
                n0: None,
                h,
                p,
                m: Some(m),
            };
            let block: Vec<f64> = samples.iter().map(|s| sample_cp_block(s, m)).collect::<Result<_>>()?;
            let star: Vec<f64> = counts.iter().map(|d| bootstrap_from_counts(d, m)).collect::<Result<_>>()?;
            let predicted = block_mse(n, m, p, 1, 1.0 - p).sqrt();
            for (name, xs) in [("p_hat_m", block), ("p_star_m", star)] {
                let mut row = summarize(&cell, name, &xs);
                row.predicted_rmse = Some(predicted);
                row.optimal_m = Some(opt);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn lags(cfg: &StudyConfig, model: &ModelSpec, p_list: &[f64]) -> Result<Vec<f64>> {
    p_list
        .iter()
        .map(|&p| find_lag(model, p, cfg.lag_draws, cfg.seed))
        .collect()
}

fn fig2(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let model = extremal_t_study_model();
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![25, 50, 100, 500]);
    let n0_list = cfg.n0_list.clone().unwrap_or_else(|| vec![Some(1), Some(5), Some(10), Some(15), None]);
    let p_list = cfg.p_list.clone().unwrap_or_else(|| vec![0.1, 0.3, 0.5, 0.7, 0.9]);
    let hs = lags(cfg, &model, &p_list)?;
    let mut rows = Vec::new();
    let mut cell_id = 0;
    for &n in &n_list {
        for &n0 in &n0_list {
            for (&p, &h) in p_list.iter().zip(&hs) {
                let source = Source::new(&model, &SiteSet::line(&[0.0, h])?, n0)?;
                let xs = replicate(cfg.seed, cell_id, cfg.reps, |rng| Ok(ecp_kendall(&source.sample(n, rng)?)?.tau_b))?;
                cell_id += 1;
                let cell = Cell {
                    model: "extremal_t",
                    n,
                    n0,
                    h,
                    p,
                    m: None,
                };
                rows.push(summarize(&cell, "p_hat", &xs));
            }
        }
    }
    Ok(rows)
}

fn fig3(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![25, 50, 100, 500]);
    let h_list = cfg.h_list.clone().unwrap_or_else(|| vec![1.0, 2.0, 3.0, 4.0]);
    let m = cfg.m.unwrap_or(10);
    let models = [
        ("extremal_t", extremal_t_study_model()),
        ("brown_resnick", brown_resnick_study_model(3.0)),
    ];
    let mut rows = Vec::new();
    let mut cell_id = 0;
    for (name, model) in &models {
        for &n in &n_list {
            for &h in &h_list {
                let sites = SiteSet::line(&[0.0, h])?;
                let p = pairwise_p(model, &sites)?;
                let source = Source::new(model, &sites, None)?;
                let trip = replicate(cfg.seed, cell_id, cfg.reps, |rng| triple(&source.sample(n, rng)?, m))?;
                cell_id += 1;
                let cell = Cell {
                    model: name,
                    n,
                    n0: None,
                    h,
                    p,
                    m: Some(m),
                };
                for (e, est) in TRIPLE_NAMES.iter().enumerate() {
                    let xs: Vec<f64> = trip.iter().map(|t| t[e]).collect();
                    rows.push(summarize(&cell, est, &xs));
                }
            }
        }
    }
    Ok(rows)
}

fn table1(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let model = extremal_t_study_model();
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![20, 50, 100]);
    let n0_list = cfg.n0_list.clone().unwrap_or_else(|| vec![Some(1), Some(10), Some(15), None]);
    let p_list = cfg.p_list.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let m = cfg.m.unwrap_or(10);
    let hs = lags(cfg, &model, &p_list)?;
    let mut rows = Vec::new();
    let mut cell_id = 0;
    for &n in &n_list {
        if n < m {
            return domain(format!("sample size {n} is below the block size {m}"));
        }
        for &n0 in &n0_list {
            for (&p, &h) in p_list.iter().zip(&hs) {
                let source = Source::new(&model, &SiteSet::line(&[0.0, h])?, n0)?;
                let trip = replicate(cfg.seed, cell_id, cfg.reps, |rng| triple(&source.sample(n, rng)?, m))?;
                cell_id += 1;
                let cell = Cell {
                    model: "extremal_t",
                    n,
                    n0,
                    h,
                    p,
                    m: Some(m),
                };
                for (e, est) in TRIPLE_NAMES.iter().enumerate() {
                    let xs: Vec<f64> = trip.iter().map(|t| t[e]).collect();
                    rows.push(summarize(&cell, est, &xs));
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_study_csv<W: std::io::Write>(out: W, table: &StudyTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &table.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// The table1 experiment as a text table: one line per (n, n0), columns
/// "mean (sd)" for p̂*_m, p̃*_m, p̂ at each p.
pub fn format_table1(table: &StudyTable) -> String {
    let mut keys: Vec<(usize, Option<usize>)> = Vec::new();
    let mut ps: Vec<f64> = Vec::new();
    for r in &table.rows {
        if !keys.contains(&(r.n, r.n0)) {
            keys.push((r.n, r.n0));
        }
        if !ps.iter().any(|p| (p - r.p).abs() < 1e-12) {
            ps.push(r.p);
        }
    }
    let mut out = String::new();
    out.push_str("n      n0  ");
    for p in &ps {
        out.push_str(&format!("| p = {p:.2}: p*_m  p~*_m  p^           "));
    }
    out.push('\n');
    for (n, n0) in keys {
        let n0s = n0.map_or("inf".to_string(), |v| v.to_string());
        out.push_str(&format!("{n:<6} {n0s:>3} "));
        for p in &ps {
            out.push_str("| ");
            for est in TRIPLE_NAMES {
                if let Some(r) = table
                    .rows
                    .iter()
                    .find(|r| r.n == n && r.n0 == n0 && (r.p - p).abs() < 1e-12 && r.estimator == est)
                {
                    out.push_str(&format!("{:.2} ({:.2}) ", r.mean, r.sd));
                }
            }
        }
        out.push('\n');
    }
    out
}
