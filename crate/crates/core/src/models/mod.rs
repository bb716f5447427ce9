//! Max-stable model specifications.
//!
//! Every model is simple (unit Fréchet margins) except the extremal process,
//! whose margin at `s` is Fréchet with scale `s`. Concurrence probabilities
//! do not depend on the margins.

pub(crate) mod exponent;
mod profile;

pub use exponent::exponent_v;
pub use profile::{spectral_sample, ProfileSampler};

use crate::error::{domain, Result};
use crate::specfun::CovarianceMatrix;
use serde::{Deserialize, Serialize};

/// Isotropic semi-variogram γ(h) of a Brown–Resnick model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VariogramSpec {
    /// γ(h) = c·‖h‖^β with c > 0 and 0 < β ≤ 2.
    Fractional { c: f64, beta: f64 },
}

impl VariogramSpec {
    pub fn eval(&self, h: f64) -> f64 {
        match *self {
            VariogramSpec::Fractional { c, beta } => {
                if h == 0.0 {
                    0.0
                } else {
                    c * h.abs().powf(beta)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            VariogramSpec::Fractional { c, beta } => {
                if !(c > 0.0 && c.is_finite()) || !(beta > 0.0 && beta <= 2.0) {
                    return domain(format!(
                        "fractional variogram needs c > 0 and 0 < beta <= 2 (c={c}, beta={beta})"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Isotropic correlation function ρ(h) of the Gaussian driver of an
/// extremal-t model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CorrelationSpec {
    /// ρ(h) = exp(−h/range).
    Exponential { range: f64 },
    /// ρ(h) = exp{−(h/range)^shape}, 0 < shape ≤ 2.
    PoweredExponential { range: f64, shape: f64 },
}

impl CorrelationSpec {
    pub fn eval(&self, h: f64) -> f64 {
        let h = h.abs();
        match *self {
            CorrelationSpec::Exponential { range } => (-h / range).exp(),
            CorrelationSpec::PoweredExponential { range, shape } => (-(h / range).powf(shape)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CorrelationSpec::Exponential { range } => range > 0.0 && range.is_finite(),
            CorrelationSpec::PoweredExponential { range, shape } => {
                range > 0.0 && range.is_finite() && shape > 0.0 && shape <= 2.0
            }
        };
        if ok {
            Ok(())
        } else {
            domain(format!("invalid correlation parameters {self:?}"))
        }
    }
}

/// A max-stable model. Serialized as `{"model": "<name>", ...params}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Multivariate logistic, α ∈ (0, 1]; α = 1 is independence.
    Logistic { alpha: f64 },
    /// η(s_j) = max_m φ[m][j]·Z_m with column sums 1. Rows are components,
    /// columns are sites; a site's first coordinate is its column index.
    MaxLinear { phi: Vec<Vec<f64>> },
    BrownResnick { variogram: VariogramSpec },
    /// Extremal-t with ν ≥ 1 degrees of freedom; ν = 1 is Schlather's model.
    ExtremalT { correlation: CorrelationSpec, nu: f64 },
    /// Gaussian storm (moving-maximum) model with storm covariance Σ.
    Smith { sigma: CovarianceMatrix },
    /// Extremal process on (0, 1].
    ExtremalProcess {},
    /// Moving maxima of the indicator of a Euclidean ball.
    BallIndicator { radius: f64, dim: usize },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::MaxLinear { .. } => "max_linear",
            ModelSpec::BrownResnick { .. } => "brown_resnick",
            ModelSpec::ExtremalT { .. } => "extremal_t",
            ModelSpec::Smith { .. } => "smith",
            ModelSpec::ExtremalProcess {} => "extremal_process",
            ModelSpec::BallIndicator { .. } => "ball_indicator",
        }
    }

    /// Checks parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Logistic { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return domain(format!("logistic alpha must be in (0,1], got {alpha}"));
                }
            }
            ModelSpec::MaxLinear { phi } => {
                let ncols = phi.first().map_or(0, Vec::len);
                if phi.is_empty() || ncols == 0 {
                    return domain("max-linear phi must be a non-empty matrix");
                }
                if phi.iter().any(|row| row.len() != ncols) {
                    return domain("max-linear phi rows must have equal length");
                }
                if phi.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return domain("max-linear phi entries must be finite and nonnegative");
                }
                for j in 0..ncols {
                    let s: f64 = phi.iter().map(|row| row[j]).sum();
                    if (s - 1.0).abs() > 1e-12 {
                        return domain(format!("max-linear column {j} sums to {s}, expected 1"));
                    }
                }
            }
            ModelSpec::BrownResnick { variogram } => variogram.validate()?,
            ModelSpec::ExtremalT { correlation, nu } => {
                correlation.validate()?;
                if !(*nu >= 1.0 && nu.is_finite()) {
                    return domain(format!("extremal-t nu must be >= 1, got {nu}"));
                }
            }
            ModelSpec::Smith { sigma } => {
                sigma.inverse_and_log_det()?;
            }
            ModelSpec::ExtremalProcess {} => {}
            ModelSpec::BallIndicator { radius, dim } => {
                if !(*radius > 0.0 && radius.is_finite()) || *dim == 0 {
                    return domain(format!(
                        "ball indicator needs radius > 0 and dim >= 1 (radius={radius}, dim={dim})"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ModelSpec = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Semi-variogram γ(h) of the Brown–Resnick representation at lag `h`
    /// (Smith models reduce to γ(h) = hᵀΣ⁻¹h/2).
    pub(crate) fn br_gamma(&self, lag: &[f64]) -> Result<Option<f64>> {
        Ok(match self {
            ModelSpec::BrownResnick { variogram } => Some(variogram.eval(norm(lag))),
            ModelSpec::Smith { sigma } => {
                let (inv, _) = sigma.inverse_and_log_det()?;
                Some(0.5 * inv.quad_form(lag))
            }
            _ => None,
        })
    }
}

/// Locations s_1, …, s_k, all of the same dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteSet {
    coords: Vec<Vec<f64>>,
}

impl SiteSet {
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match coords.first() {
            Some(c) if !c.is_empty() => c.len(),
            _ => return domain("site set needs at least one site with dim >= 1"),
        };
        if coords.iter().any(|c| c.len() != dim) {
            return domain("all sites must have the same dimension");
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return domain("site coordinates must be finite");
        }
        for i in 0..coords.len() {
            for j in 0..i {
                if coords[i] == coords[j] {
                    return domain(format!("sites {j} and {i} coincide"));
                }
            }
        }
        Ok(Self { coords })
    }

    /// One-dimensional sites at the given positions.
    pub fn line(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| vec![x]).collect())
    }

    /// Regular 1-d grid `start, start+step, …` up to `end` inclusive.
    pub fn grid_1d(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || end < start {
            return domain("grid_1d needs step > 0 and end >= start");
        }
        let n = ((end - start) / step + 1e-9).floor() as usize + 1;
        Self::line(&(0..n).map(|i| start + i as f64 * step).collect::<Vec<_>>())
    }

    /// Sites naming max-linear columns by index.
    pub fn indices(idx: &[usize]) -> Result<Self> {
        Self::line(&idx.iter().map(|&i| i as f64).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords[0].len()
    }

    pub fn site(&self, j: usize) -> &[f64] {
        &self.coords[j]
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn lag(&self, i: usize, j: usize) -> Vec<f64> {
        self.coords[j]
            .iter()
            .zip(&self.coords[i])
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        norm(&self.lag(i, j))
    }

    /// The sites at positions `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return domain(format!("site index {bad} out of range (k={})", self.len()));
        }
        Self::new(idx.iter().map(|&i| self.coords[i].clone()).collect())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Column indices for a max-linear model (first coordinate of each site).
pub(crate) fn max_linear_columns(sites: &SiteSet, ncols: usize) -> Result<Vec<usize>> {
    sites
        .coords()
        .iter()
        .map(|c| {
            let x = c[0];
            if x >= 0.0 && x.fract() == 0.0 && (x as usize) < ncols {
                Ok(x as usize)
            } else {
                domain(format!("max-linear site {x} is not a column index below {ncols}"))
            }
        })
        .collect()
}

/// Pairwise concurrence probability p(s1, s2), which equals Kendall's τ of
/// (η(s1), η(s2)). Uses the model's closed form or a deterministic
/// quadrature of the Monte-Carlo integrand.
pub fn kendall_target_p(model: &ModelSpec, s1: &[f64], s2: &[f64]) -> Result<f64> {
    model.validate()?;
    if s1 == s2 {
        return Ok(1.0);
    }
    let pair = SiteSet::new(vec![s1.to_vec(), s2.to_vec()])?;
    crate::concurrence::pairwise_p(model, &pair)
}
