//! Simulation of max-stable fields with hitting-scenario tracking.

mod export;

pub use export::write_realizations_csv;

use crate::error::{capability, domain, Result};
use crate::models::{ModelSpec, ProfileSampler, SiteSet};
use crate::specfun::{sample_positive_stable, SeededRng};
use rand::RngCore;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Simulated field values at the sites of a [`SiteSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub values: Vec<f64>,
    /// Ordinal (from 1) of the Poisson atom attaining the maximum at each
    /// site; `None` for samplers that do not track atoms.
    pub hit_index: Option<Vec<usize>>,
    /// The stopping rule was not met within `max_atoms`.
    pub truncation_flag: bool,
}

/// A set partition of site indices `0..k`; blocks are sorted and ordered
/// by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for b in &mut blocks {
            if b.is_empty() {
                return domain("partition blocks must be nonempty");
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= k || seen[i] {
                    return domain(format!("index {i} repeated or outside 0..{k}"));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return domain("partition does not cover every site");
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// Groups sites with equal labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut firsts: Vec<usize> = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            match firsts.iter().position(|f| f == l) {
                Some(b) => blocks[b].push(i),
                None => {
                    firsts.push(*l);
                    blocks.push(vec![i]);
                }
            }
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// All sites concurrent.
    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimControl {
    pub max_atoms: usize,
    /// Almost-sure bound on the spectral profile; overrides the model's own
    /// bound. A hint below the true bound biases the result.
    pub bound_hint: Option<f64>,
}

impl Default for SimControl {
    fn default() -> Self {
        Self {
            max_atoms: 1000,
            bound_hint: None,
        }
    }
}

/// Reusable exact simulator for one model on one site set.
///
/// Atoms ζ_i = 1/Γ_i are generated in decreasing order; each carries a
/// bounded profile Y_i and the run stops once ζ_{i+1}·B falls below the
/// current minimum of the field. Every model here has a bounded profile
/// representation (see [`ProfileSampler::sample_exact_into`]), so the flag
/// is only raised when `max_atoms` is too small.
#[derive(Clone, Debug)]
pub struct MaxStableSimulator {
    sampler: ProfileSampler,
    bound: f64,
    max_atoms: usize,
}

impl MaxStableSimulator {
    pub fn new(model: &ModelSpec, sites: &SiteSet, ctrl: &SimControl) -> Result<Self> {
        if ctrl.max_atoms == 0 {
            return domain("max_atoms must be at least 1");
        }
        if let Some(b) = ctrl.bound_hint {
            if !(b > 0.0 && b.is_finite()) {
                return domain(format!("bound_hint must be positive and finite, got {b}"));
            }
        }
        let sampler = ProfileSampler::new(model, sites)?;
        let bound = ctrl.bound_hint.unwrap_or_else(|| sampler.exact_bound());
        Ok(Self {
            sampler,
            bound,
            max_atoms: ctrl.max_atoms,
        })
    }

    pub fn k(&self) -> usize {
        self.sampler.k()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn draw(&self, rng: &mut SeededRng) -> FieldRealization {
        let k = self.k();
        let mut values = vec![0.0; k];
        let mut hits = vec![0usize; k];
        let mut y = vec![0.0; k];
        let mut gamma: f64 = Exp1.sample(rng);
        let mut truncated = true;
        for atom in 1..=self.max_atoms {
            let zeta = 1.0 / gamma;
            self.sampler.sample_exact_into(rng, &mut y);
            for j in 0..k {
                let v = zeta * y[j];
                // strict: ties go to the earlier atom
                if v > values[j] {
                    values[j] = v;
                    hits[j] = atom;
                }
            }
            let e: f64 = Exp1.sample(rng);
            gamma += e;
            let floor = values.iter().cloned().fold(f64::INFINITY, f64::min);
            if floor > 0.0 && self.bound / gamma < floor {
                truncated = false;
                break;
            }
        }
        FieldRealization {
            values,
            hit_index: Some(hits),
            truncation_flag: truncated,
        }
    }
}

/// One max-stable realization at `sites`.
pub fn simulate_max_stable(
    model: &ModelSpec,
    sites: &SiteSet,
    ctrl: &SimControl,
    rng: &mut SeededRng,
) -> Result<FieldRealization> {
    Ok(MaxStableSimulator::new(model, sites, ctrl)?.draw(rng))
}

/// `reps` independent realizations; replicate `r` draws from substream `r`
/// of a stream derived from `rng`, so output does not depend on the
/// number of worker threads.
pub fn simulate_fields(
    model: &ModelSpec,
    sites: &SiteSet,
    reps: usize,
    ctrl: &SimControl,
    rng: &mut SeededRng,
) -> Result<Vec<FieldRealization>> {
    let sim = MaxStableSimulator::new(model, sites, ctrl)?;
    let base = SeededRng::new(rng.seed(), rng.next_u64());
    Ok((0..reps as u64)
        .into_par_iter()
        .map(|r| sim.draw(&mut base.derive(r)))
        .collect())
}

/// Exact logistic vector X_j = (S/E_j)^α with S positive α-stable
/// (Laplace transform exp(−t^α)) and E_j i.i.d. Exp(1); α = 1 gives
/// independent unit Fréchet coordinates.
pub fn simulate_logistic_exact(alpha: f64, k: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("logistic alpha must be in (0,1], got {alpha}"));
    }
    if k == 0 {
        return domain("need at least one coordinate");
    }
    let s = if alpha == 1.0 {
        1.0
    } else {
        sample_positive_stable(alpha, rng)?
    };
    Ok((0..k)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            (s / e).powf(alpha)
        })
        .collect())
}

/// Sampler for the partial maxima (1/n0)·max_{i ≤ n0} Y_i(s)/U_i, which
/// lies in the domain of attraction of the max-stable model.
#[derive(Clone, Debug)]
pub struct DoaSampler {
    sampler: ProfileSampler,
    n0: usize,
}

impl DoaSampler {
    pub fn new(model: &ModelSpec, sites: &SiteSet, n0: usize) -> Result<Self> {
        if n0 == 0 {
            return domain("n0 must be at least 1");
        }
        Ok(Self {
            sampler: ProfileSampler::new(model, sites)?,
            n0,
        })
    }

    pub fn draw(&self, rng: &mut SeededRng) -> Vec<f64> {
        let k = self.sampler.k();
        let mut out = vec![0.0_f64; k];
        let mut y = vec![0.0; k];
        for _ in 0..self.n0 {
            self.sampler.sample_into(rng, &mut y);
            let u = rng.uniform_open();
            for j in 0..k {
                out[j] = out[j].max(y[j] / u);
            }
        }
        let scale = 1.0 / self.n0 as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }
}

/// One draw of the domain-of-attraction sampler with `n0` storms.
///
/// Profiles that vanish (extremal-t, indicator models) can leave zeros,
/// which downstream estimators treat as ties.
pub fn simulate_doa(model: &ModelSpec, sites: &SiteSet, n0: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    Ok(DoaSampler::new(model, sites, n0)?.draw(rng))
}

pub fn hitting_scenario(real: &FieldRealization) -> Result<Partition> {
    match &real.hit_index {
        Some(h) => Ok(Partition::from_labels(h)),
        None => capability("realization carries no hit indices"),
    }
}

/// Hit labels over `grid` for `reps` independent realizations.
pub fn simulate_cell_labels(
    model: &ModelSpec,
    grid: &SiteSet,
    reps: usize,
    rng: &mut SeededRng,
) -> Result<CellLabels> {
    let fields = simulate_fields(model, grid, reps, &SimControl::default(), rng)?;
    let truncated = fields.iter().filter(|f| f.truncation_flag).count();
    let labels = fields.into_iter().map(|f| f.hit_index.unwrap_or_default()).collect();
    Ok(CellLabels { labels, truncated })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellLabels {
    pub labels: Vec<Vec<usize>>,
    /// Replicates whose stopping rule was not met.
    pub truncated: usize,
}
