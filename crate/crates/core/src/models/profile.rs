use super::{max_linear_columns, ModelSpec, SiteSet};
use crate::error::{domain, Result};
use crate::specfun::{gamma, ln_gamma, CovarianceMatrix, GaussianSampler, SeededRng};
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma};
use std::f64::consts::PI;

/// Axis-aligned box from which storm centres are drawn uniformly.
#[derive(Clone, Debug)]
struct Window {
    lo: Vec<f64>,
    hi: Vec<f64>,
    volume: f64,
}

impl Window {
    fn around(sites: &SiteSet, margin: &[f64]) -> Self {
        let d = sites.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in sites.coords() {
            for i in 0..d {
                lo[i] = lo[i].min(c[i] - margin[i]);
                hi[i] = hi[i].max(c[i] + margin[i]);
            }
        }
        let volume = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        Self { lo, hi, volume }
    }

    fn draw(&self, rng: &mut SeededRng, out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * rng.uniform_open();
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    /// Y(s) = G^{−α}/Γ(1−α), G ~ Exp(1) i.i.d. over sites.
    Logistic { alpha: f64, inv_gamma: f64, tilted: Gamma<f64> },
    /// Logistic with α = 1: Y = k·e_J, J uniform.
    Independent,
    /// Y(s_j) = n·φ[M][j], M uniform on the n components.
    MaxLinear { rows: Vec<Vec<f64>> },
    /// Y(s) = exp{W(s) − γ(s − s_0)} with W(s_0) = 0.
    BrownResnick { gauss: GaussianSampler, gamma: Vec<f64> },
    /// Y(s) = c_ν max{0, W(s)}^ν, W standard Gaussian with correlation ρ.
    ExtremalT { gauss: GaussianSampler, corr: Vec<f64>, nu: f64, c_nu: f64, chi: ChiSquared<f64> },
    /// Y(s) = |window|·φ_Σ(s − u), u uniform on the window.
    Smith { window: Window, inv: CovarianceMatrix, log_peak: f64, sites: Vec<Vec<f64>> },
    /// Y(s) = 1{U ≤ s}, U ~ U(0, 1).
    ExtremalProcess { s: Vec<f64> },
    /// Y(s) = (|window|/|A|)·1{‖s − u‖ ≤ r}, u uniform on the window.
    Ball { window: Window, radius: f64, scale: f64, sites: Vec<Vec<f64>> },
}

/// Draws spectral profiles Y(s_1), …, Y(s_k) for a fixed model and site set.
///
/// Two representations are offered. [`ProfileSampler::sample_into`] is the
/// textbook profile of each model. [`ProfileSampler::sample_exact_into`]
/// returns a profile with the same exponent measure but bounded by
/// [`ProfileSampler::exact_bound`], which is what exact Poisson simulation
/// needs: for the logistic, Brown–Resnick and extremal-t models it is the
/// sum-normalised profile k·Y/ΣY drawn under the law of Y tilted by
/// ΣY(s_j)/k (a uniform mixture of single-site tilts).
#[derive(Clone, Debug)]
pub struct ProfileSampler {
    k: usize,
    kind: Kind,
}

impl ProfileSampler {
    pub fn new(model: &ModelSpec, sites: &SiteSet) -> Result<Self> {
        model.validate()?;
        let k = sites.len();
        let kind = match model {
            ModelSpec::Logistic { alpha } if *alpha == 1.0 => Kind::Independent,
            ModelSpec::Logistic { alpha } => Kind::Logistic {
                alpha: *alpha,
                inv_gamma: 1.0 / gamma(1.0 - alpha),
                tilted: Gamma::new(1.0 - alpha, 1.0)
                    .map_err(|e| crate::Error::Domain(e.to_string()))?,
            },
            ModelSpec::MaxLinear { phi } => {
                let cols = max_linear_columns(sites, phi[0].len())?;
                Kind::MaxLinear {
                    rows: phi
                        .iter()
                        .map(|row| cols.iter().map(|&c| row[c]).collect())
                        .collect(),
                }
            }
            ModelSpec::BrownResnick { .. } => {
                let mut gamma = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..k {
                        gamma[i * k + j] = model.br_gamma(&sites.lag(i, j))?.unwrap_or(0.0);
                    }
                }
                let cov = CovarianceMatrix::from_fn(k, |i, j| gamma[i] + gamma[j] - gamma[i * k + j])?;
                Kind::BrownResnick {
                    gauss: GaussianSampler::new(&cov)?,
                    gamma,
                }
            }
            ModelSpec::ExtremalT { correlation, nu } => {
                let mut corr = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..k {
                        corr[i * k + j] = correlation.eval(sites.distance(i, j));
                    }
                }
                let cov = CovarianceMatrix::from_fn(k, |i, j| corr[i * k + j])?;
                let c_nu = (0.5 * PI.ln() - 0.5 * (nu - 2.0) * 2f64.ln()
                    - ln_gamma(0.5 * (nu + 1.0)))
                .exp();
                Kind::ExtremalT {
                    gauss: GaussianSampler::new(&cov)?,
                    corr,
                    nu: *nu,
                    c_nu,
                    chi: ChiSquared::new(nu + 1.0).map_err(|e| crate::Error::Domain(e.to_string()))?,
                }
            }
            ModelSpec::Smith { sigma } => {
                let d = sigma.dim();
                if sites.dim() != d {
                    return domain(format!("Smith sigma is {d}-dimensional, sites are {}", sites.dim()));
                }
                let (inv, log_det) = sigma.inverse_and_log_det()?;
                // storm mass beyond 7 standard deviations is below 1e-11
                let margin: Vec<f64> = (0..d).map(|i| 7.0 * sigma.get(i, i).sqrt()).collect();
                Kind::Smith {
                    window: Window::around(sites, &margin),
                    inv,
                    log_peak: -0.5 * d as f64 * (2.0 * PI).ln() - 0.5 * log_det,
                    sites: sites.coords().to_vec(),
                }
            }
            ModelSpec::ExtremalProcess {} => {
                let mut s = Vec::with_capacity(k);
                for c in sites.coords() {
                    if c.len() != 1 || !(c[0] > 0.0 && c[0] <= 1.0) {
                        return domain("extremal process sites must be 1-d points in (0,1]");
                    }
                    s.push(c[0]);
                }
                Kind::ExtremalProcess { s }
            }
            ModelSpec::BallIndicator { radius, dim } => {
                if sites.dim() != *dim {
                    return domain(format!("ball indicator is {dim}-dimensional, sites are {}", sites.dim()));
                }
                let window = Window::around(sites, &vec![*radius; *dim]);
                let d = *dim as f64;
                let ball = PI.powf(d / 2.0) / gamma(1.0 + d / 2.0) * radius.powf(d);
                Kind::Ball {
                    scale: window.volume / ball,
                    window,
                    radius: *radius,
                    sites: sites.coords().to_vec(),
                }
            }
        };
        Ok(Self { k, kind })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Draws the plain spectral profile into `out` (length k).
    pub fn sample_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        let k = self.k;
        match &self.kind {
            Kind::Logistic { alpha, inv_gamma, .. } => {
                for y in out.iter_mut() {
                    let g: f64 = Exp1.sample(rng);
                    *y = g.powf(-alpha) * inv_gamma;
                }
            }
            Kind::Independent => one_hot(rng, out),
            Kind::MaxLinear { rows } => {
                let n = rows.len();
                let m = pick(rng, n);
                for (y, v) in out.iter_mut().zip(&rows[m]) {
                    *y = n as f64 * v;
                }
            }
            Kind::BrownResnick { gauss, gamma } => {
                let mut z = vec![0.0; k];
                gauss.sample_into(rng, &mut z, out);
                for j in 0..k {
                    out[j] = (out[j] - gamma[j]).exp();
                }
            }
            Kind::ExtremalT { gauss, nu, c_nu, .. } => {
                let mut z = vec![0.0; k];
                gauss.sample_into(rng, &mut z, out);
                for y in out.iter_mut() {
                    *y = if *y > 0.0 { c_nu * y.powf(*nu) } else { 0.0 };
                }
            }
            Kind::Smith { window, inv, log_peak, sites } => {
                let mut u = vec![0.0; window.lo.len()];
                window.draw(rng, &mut u);
                let mut h = vec![0.0; u.len()];
                for (y, s) in out.iter_mut().zip(sites) {
                    for i in 0..u.len() {
                        h[i] = s[i] - u[i];
                    }
                    *y = window.volume * (log_peak - 0.5 * inv.quad_form(&h)).exp();
                }
            }
            Kind::ExtremalProcess { s } => {
                let u = rng.uniform_open();
                for (y, sj) in out.iter_mut().zip(s) {
                    *y = if u <= *sj { 1.0 } else { 0.0 };
                }
            }
            Kind::Ball { window, radius, scale, sites } => {
                let mut u = vec![0.0; window.lo.len()];
                window.draw(rng, &mut u);
                let r2 = radius * radius;
                for (y, s) in out.iter_mut().zip(sites) {
                    let d2: f64 = s.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum();
                    *y = if d2 <= r2 { *scale } else { 0.0 };
                }
            }
        }
    }

    /// Draws a profile bounded by [`Self::exact_bound`] with the same
    /// exponent measure as the plain profile.
    pub fn sample_exact_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        let k = self.k;
        match &self.kind {
            Kind::Logistic { alpha, tilted, .. } => {
                let anchor = pick(rng, k);
                for (j, y) in out.iter_mut().enumerate() {
                    let g: f64 = if j == anchor {
                        tilted.sample(rng)
                    } else {
                        Exp1.sample(rng)
                    };
                    *y = -alpha * g.ln();
                }
                normalize_logs(out);
            }
            Kind::BrownResnick { gauss, gamma } => {
                let anchor = pick(rng, k);
                let mut z = vec![0.0; k];
                gauss.sample_into(rng, &mut z, out);
                let w_anchor = out[anchor];
                for j in 0..k {
                    out[j] = out[j] - w_anchor - gamma[anchor * k + j];
                }
                normalize_logs(out);
            }
            Kind::ExtremalT { gauss, corr, nu, chi, .. } => {
                let anchor = pick(rng, k);
                let mut z = vec![0.0; k];
                gauss.sample_into(rng, &mut z, out);
                // W(anchor) from the ν-tilted half-normal, rest by kriging
                let w = chi.sample(rng).sqrt();
                let z_anchor = out[anchor];
                for j in 0..k {
                    let wj = out[j] + corr[j * k + anchor] * (w - z_anchor);
                    out[j] = if j == anchor { w.powf(*nu) } else if wj > 0.0 { wj.powf(*nu) } else { 0.0 };
                }
                let total: f64 = out.iter().sum();
                for y in out.iter_mut() {
                    *y *= k as f64 / total;
                }
            }
            _ => self.sample_into(rng, out),
        }
    }

    /// Almost-sure bound on the profiles from [`Self::sample_exact_into`].
    pub fn exact_bound(&self) -> f64 {
        match &self.kind {
            Kind::Logistic { .. } | Kind::Independent | Kind::BrownResnick { .. } | Kind::ExtremalT { .. } => {
                self.k as f64
            }
            Kind::MaxLinear { rows } => {
                rows.len() as f64 * rows.iter().flatten().fold(0.0_f64, |a, &b| a.max(b))
            }
            Kind::Smith { window, log_peak, .. } => window.volume * log_peak.exp(),
            Kind::ExtremalProcess { .. } => 1.0,
            Kind::Ball { scale, .. } => *scale,
        }
    }
}

fn pick(rng: &mut SeededRng, n: usize) -> usize {
    ((rng.uniform_open() * n as f64) as usize).min(n - 1)
}

fn one_hot(rng: &mut SeededRng, out: &mut [f64]) {
    let k = out.len();
    let j = pick(rng, k);
    out.fill(0.0);
    out[j] = k as f64;
}

/// Replaces log-profile values by k·exp(l_j)/Σ exp(l).
fn normalize_logs(out: &mut [f64]) {
    let k = out.len() as f64;
    let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for y in out.iter_mut() {
        *y = (*y - max).exp();
        total += *y;
    }
    for y in out.iter_mut() {
        *y *= k / total;
    }
}

/// A single plain spectral profile Y(s_1..k).
pub fn spectral_sample(model: &ModelSpec, sites: &SiteSet, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let sampler = ProfileSampler::new(model, sites)?;
    let mut out = vec![0.0; sites.len()];
    sampler.sample_into(rng, &mut out);
    Ok(out)
}
