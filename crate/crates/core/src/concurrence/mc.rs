use super::{ConcurrenceEstimate, Method};
use crate::error::{domain, Result};
use crate::models::{exponent_v, ModelSpec, ProfileSampler, SiteSet};
use crate::specfun::{
    gamma, integrate, integrate_to_infinity, normal_cdf, normal_pdf, student_cdf, SeededRng,
};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;

/// Draws (or antithetic pairs) per batch; batch `b` uses substream `b`.
pub const DEFAULT_BATCH: u64 = 4096;

/// Brown–Resnick integrand 1/[Φ(z) + exp{γ − √(2γ) z} Φ(√(2γ) − z)],
/// whose expectation under Z ~ N(0, 1) is p(o, h).
pub fn brown_resnick_integrand(gamma: f64, z: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    let a = (2.0 * gamma).sqrt();
    let expo = gamma - a * z;
    if expo > 700.0 {
        return 0.0;
    }
    1.0 / (normal_cdf(z) + expo.exp() * normal_cdf(a - z))
}

/// Extremal-t integrand with T ~ Student(ν + 1):
/// [T_{ν+1}(T) + w^{−ν} T_{ν+1}{−ρ/σ + 1/(σ w)}]^{−1} 1{w > 0},
/// w = ρ + σT, σ = √{(1 − ρ²)/(ν + 1)}.
pub fn extremal_t_integrand(rho: f64, nu: f64, t: f64) -> f64 {
    if rho >= 1.0 {
        return 1.0;
    }
    let sigma = ((1.0 - rho * rho) / (nu + 1.0)).sqrt();
    let w = rho + sigma * t;
    if w <= 0.0 {
        return 0.0;
    }
    let first = student_cdf(t, nu + 1.0).unwrap_or(f64::NAN);
    let second = w.powf(-nu) * student_cdf(-rho / sigma + 1.0 / (sigma * w), nu + 1.0).unwrap_or(f64::NAN);
    1.0 / (first + second)
}

/// p(o, h) for Brown–Resnick by Gauss–Kronrod quadrature over N(0, 1).
pub fn ecp_brown_resnick_quadrature(gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    integrate(|z| normal_pdf(z) * brown_resnick_integrand(gamma, z), -12.0, 12.0, 1e-13).clamp(0.0, 1.0)
}

/// p(o, h) for extremal-t by quadrature over the Student(ν + 1) law.
pub fn ecp_extremal_t_quadrature(rho: f64, nu: f64) -> Result<f64> {
    if !(nu >= 1.0) || !(-1.0..=1.0).contains(&rho) {
        return domain(format!("extremal-t needs nu >= 1 and |rho| <= 1 (nu={nu}, rho={rho})"));
    }
    if rho >= 1.0 {
        return Ok(1.0);
    }
    let dof = nu + 1.0;
    let log_c = crate::specfun::ln_gamma((dof + 1.0) / 2.0)
        - crate::specfun::ln_gamma(dof / 2.0)
        - 0.5 * (dof * std::f64::consts::PI).ln();
    let pdf = |t: f64| (log_c - (dof + 1.0) / 2.0 * (t * t / dof).ln_1p()).exp();
    let sigma = ((1.0 - rho * rho) / dof).sqrt();
    let t0 = -rho / sigma;
    let f = |t: f64| pdf(t) * extremal_t_integrand(rho, nu, t);
    // As ρ → 1 the lower limit runs off to −∞ while the mass stays near 0;
    // geometric breakpoints keep every piece resolvable.
    let mut v = integrate_to_infinity(f, t0.max(0.0), 1e-14);
    let mut hi = 0.0_f64;
    let mut width = 8.0;
    while hi > t0 {
        let lo = (hi - width).max(t0);
        v += integrate(f, lo, hi, 1e-14);
        hi = lo;
        width *= 2.0;
    }
    Ok(v.clamp(0.0, 1.0))
}

#[derive(Clone, Debug)]
enum Integrand {
    BrownResnick { gamma: f64 },
    ExtremalT { rho: f64, nu: f64, student: StudentT<f64> },
    Logistic { alpha: f64, k: usize, inv_gamma: f64 },
    Profile { sampler: ProfileSampler, model: ModelSpec, sites: SiteSet },
}

impl Integrand {
    fn supports_antithetic(&self) -> bool {
        !matches!(self, Integrand::Profile { .. })
    }

    /// One unit: a single draw, or the mean of an antithetic pair.
    fn unit(&self, rng: &mut SeededRng, antithetic: bool, scratch: &mut Vec<f64>) -> f64 {
        match self {
            Integrand::BrownResnick { gamma } => {
                let z: f64 = StandardNormal.sample(rng);
                let a = brown_resnick_integrand(*gamma, z);
                if antithetic {
                    0.5 * (a + brown_resnick_integrand(*gamma, -z))
                } else {
                    a
                }
            }
            Integrand::ExtremalT { rho, nu, student } => {
                let t = student.sample(rng);
                let a = extremal_t_integrand(*rho, *nu, t);
                if antithetic {
                    0.5 * (a + extremal_t_integrand(*rho, *nu, -t))
                } else {
                    a
                }
            }
            Integrand::Logistic { alpha, k, inv_gamma } => {
                // Y_j = (−log U_j)^{−α}/Γ(1−α); V(Y) = (Σ Y_j^{−1/α})^α
                scratch.clear();
                for _ in 0..*k {
                    scratch.push(rng.uniform_open());
                }
                let eval = |flip: bool| {
                    let s: f64 = scratch
                        .iter()
                        .map(|&u| {
                            let u = if flip { 1.0 - u } else { u };
                            let y = (-u.ln()).powf(-alpha) * inv_gamma;
                            y.powf(-1.0 / alpha)
                        })
                        .sum();
                    s.powf(-alpha)
                };
                if antithetic {
                    0.5 * (eval(false) + eval(true))
                } else {
                    eval(false)
                }
            }
            Integrand::Profile { sampler, model, sites } => {
                scratch.resize(sampler.k(), 0.0);
                sampler.sample_into(rng, scratch);
                if scratch.iter().any(|y| *y <= 0.0) {
                    return 0.0;
                }
                exponent_v(model, sites, scratch).map_or(0.0, |v| 1.0 / v)
            }
        }
    }
}

/// Monte-Carlo estimate of p(s_1, …, s_k) = E[1/V{Y(s_1), …, Y(s_k)}].
///
/// Brown–Resnick and Smith (k = 2) use the one-dimensional Gaussian
/// integrand, extremal-t (k = 2) the Student integrand, the logistic model
/// its i.i.d. profile; other models sample their spectral profile.
/// With `antithetic`, draws are paired (Z, −Z) (uniforms U, 1 − U for the
/// logistic model) and each pair counts once for the standard error.
/// Models without an antithetic scheme fall back to plain sampling.
///
/// Work is split into batches of [`DEFAULT_BATCH`] units on substreams of
/// a stream derived from `rng`, so the result is deterministic for a given
/// `(rng state, n_draws)` and independent of the thread count.
pub fn ecp_mc(
    model: &ModelSpec,
    sites: &SiteSet,
    n_draws: u64,
    antithetic: bool,
    rng: &mut SeededRng,
) -> Result<ConcurrenceEstimate> {
    model.validate()?;
    if n_draws == 0 {
        return domain("ecp_mc needs n_draws >= 1");
    }
    let k = sites.len();
    let integrand = match model {
        _ if k == 1 => return Ok(ConcurrenceEstimate::exact(1.0, Method::ClosedForm)),
        ModelSpec::BrownResnick { .. } | ModelSpec::Smith { .. } if k == 2 => Integrand::BrownResnick {
            gamma: model.br_gamma(&sites.lag(0, 1))?.unwrap_or(0.0),
        },
        ModelSpec::ExtremalT { correlation, nu } if k == 2 => Integrand::ExtremalT {
            rho: correlation.eval(sites.distance(0, 1)),
            nu: *nu,
            student: StudentT::new(nu + 1.0).map_err(|e| crate::Error::Domain(e.to_string()))?,
        },
        ModelSpec::Logistic { alpha } if *alpha < 1.0 => Integrand::Logistic {
            alpha: *alpha,
            k,
            inv_gamma: 1.0 / gamma(1.0 - alpha),
        },
        _ => {
            // probe the exponent function for capability before sampling
            exponent_v(model, sites, &vec![1.0; k])?;
            Integrand::Profile {
                sampler: ProfileSampler::new(model, sites)?,
                model: model.clone(),
                sites: sites.clone(),
            }
        }
    };
    let antithetic = antithetic && integrand.supports_antithetic();
    let method = if antithetic { Method::McAntithetic } else { Method::McPlain };

    // complete dependence short-circuits before sampling
    let degenerate = match &integrand {
        Integrand::BrownResnick { gamma } => *gamma <= 0.0,
        Integrand::ExtremalT { rho, .. } => *rho >= 1.0,
        _ => false,
    };
    if degenerate {
        return Ok(ConcurrenceEstimate {
            value: 1.0,
            stderr: 0.0,
            n_draws,
            method,
        });
    }

    let units = if antithetic { (n_draws / 2).max(1) } else { n_draws };
    let base = SeededRng::new(rng.seed(), rng.next_u64());
    let n_batches = units.div_ceil(DEFAULT_BATCH);
    let partials: Vec<(f64, f64)> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut r = base.derive(b);
            let len = DEFAULT_BATCH.min(units - b * DEFAULT_BATCH);
            let mut scratch = Vec::new();
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..len {
                let v = integrand.unit(&mut r, antithetic, &mut scratch);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partials.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = units as f64;
    let mean = sum / n;
    let var = if units > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ConcurrenceEstimate {
        value: mean.clamp(0.0, 1.0),
        stderr: (var / n).sqrt(),
        n_draws: if antithetic { 2 * units } else { units },
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CorrelationSpec, VariogramSpec};

    fn br(c: f64) -> ModelSpec {
        ModelSpec::BrownResnick {
            variogram: VariogramSpec::Fractional { c, beta: 1.0 },
        }
    }

    #[test]
    fn brown_resnick_degenerate_is_one() {
        for z in [-3.0, 0.0, 2.0] {
            assert_eq!(brown_resnick_integrand(0.0, z), 1.0);
        }
        assert_eq!(ecp_brown_resnick_quadrature(0.0), 1.0);
        assert!(ecp_brown_resnick_quadrature(1e-12) > 1.0 - 1e-5);
        assert!(ecp_brown_resnick_quadrature(200.0) < 1e-6);
    }

    #[test]
    fn brown_resnick_mc_matches_quadrature() {
        let sites = SiteSet::line(&[0.0, 1.0]).unwrap();
        let mut rng = SeededRng::new(1, 0);
        let est = ecp_mc(&br(1.0 / 1.627), &sites, 200_000, true, &mut rng).unwrap();
        let q = ecp_brown_resnick_quadrature(1.0 / 1.627);
        assert!((est.value - q).abs() < 4.0 * est.stderr, "{} vs {q}", est.value);
        assert_eq!(est.method, Method::McAntithetic);
        assert_eq!(est.n_draws, 200_000);
    }

    #[test]
    fn extremal_t_mc_matches_quadrature() {
        let model = ModelSpec::ExtremalT {
            correlation: CorrelationSpec::Exponential { range: 10.0 },
            nu: 5.0,
        };
        let sites = SiteSet::line(&[0.0, 3.0]).unwrap();
        let rho = (-0.3_f64).exp();
        let q = ecp_extremal_t_quadrature(rho, 5.0).unwrap();
        let mut rng = SeededRng::new(2, 0);
        let est = ecp_mc(&model, &sites, 200_000, false, &mut rng).unwrap();
        assert!((est.value - q).abs() < 4.0 * est.stderr, "{} vs {q}", est.value);
        assert_eq!(ecp_extremal_t_quadrature(1.0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn extremal_t_quadrature_near_full_dependence() {
        // scipy quad oracle, ν = 5
        for (eps, want) in [
            (1e-1, 0.509_297_983_9),
            (2e-2, 0.753_187_666_1),
            (1e-2, 0.820_512_078_5),
            (1e-4, 0.980_912_673_5),
            (1e-8, 0.999_807_820_1),
        ] {
            let q = ecp_extremal_t_quadrature(1.0 - eps, 5.0).unwrap();
            assert!((q - want).abs() < 1e-9, "1 - rho = {eps}: {q} vs {want}");
        }
    }

    #[test]
    fn brown_resnick_quadrature_limits() {
        let mut last = 0.0;
        for g in [1e1, 1.0, 1e-2, 1e-4, 1e-8] {
            let q = ecp_brown_resnick_quadrature(g);
            assert!(q > last, "gamma = {g}: {q}");
            last = q;
        }
        assert!(last > 1.0 - 1e-3);
    }

    #[test]
    fn logistic_mc_matches_closed_form() {
        let sites = SiteSet::line(&[0.0, 1.0, 2.0]).unwrap();
        let mut rng = SeededRng::new(3, 0);
        let est = ecp_mc(&ModelSpec::Logistic { alpha: 0.5 }, &sites, 200_000, true, &mut rng).unwrap();
        assert!((est.value - 0.375).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn profile_path_for_max_linear_and_extremal_process() {
        let phi = vec![vec![0.6, 0.1], vec![0.3, 0.2], vec![0.1, 0.7]];
        let (exact, _) = super::super::closed::ecp_max_linear(&phi, &[0, 1]).unwrap();
        let mut rng = SeededRng::new(4, 0);
        let est = ecp_mc(
            &ModelSpec::MaxLinear { phi },
            &SiteSet::indices(&[0, 1]).unwrap(),
            200_000,
            true,
            &mut rng,
        )
        .unwrap();
        assert_eq!(est.method, Method::McPlain);
        assert!((est.value - exact).abs() < 4.0 * est.stderr + 1e-12, "{} vs {exact}", est.value);
        let est = ecp_mc(
            &ModelSpec::ExtremalProcess {},
            &SiteSet::line(&[0.1, 0.2, 0.5]).unwrap(),
            200_000,
            false,
            &mut rng,
        )
        .unwrap();
        assert!((est.value - 0.2).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn capability_error_for_trivariate_brown_resnick() {
        let mut rng = SeededRng::new(5, 0);
        let three = SiteSet::line(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            ecp_mc(&br(1.0), &three, 100, false, &mut rng),
            Err(crate::Error::Capability(_))
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let sites = SiteSet::line(&[0.0, 2.0]).unwrap();
        let a = ecp_mc(&br(0.5), &sites, 50_000, true, &mut SeededRng::new(9, 0)).unwrap();
        let b = ecp_mc(&br(0.5), &sites, 50_000, true, &mut SeededRng::new(9, 0)).unwrap();
        assert_eq!(a, b);
    }
}
