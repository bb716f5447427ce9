use super::mc::{ecp_brown_resnick_quadrature, ecp_extremal_t_quadrature};
use crate::error::{capability, domain, Result};
use crate::models::{exponent_v, ModelSpec, SiteSet};

/// k-variate logistic: p = ∏_{j=1}^{k−1} (1 − α/j).
pub fn ecp_logistic(alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("logistic alpha must be in (0,1], got {alpha}"));
    }
    if k < 2 {
        return domain(format!("concurrence needs k >= 2 sites, got {k}"));
    }
    Ok((1..k).map(|j| 1.0 - alpha / j as f64).product())
}

/// Max-linear model: returns p and the per-component terms p_ℓ, where p_ℓ
/// is the probability that component ℓ attains the maximum at every site
/// of `subset` (columns of `phi`).
///
/// Uses 0/0 = 0, a/0 = ∞ for a > 0 and 1/∞ = 0.
pub fn ecp_max_linear(phi: &[Vec<f64>], subset: &[usize]) -> Result<(f64, Vec<f64>)> {
    let ncols = phi.first().map_or(0, Vec::len);
    if subset.is_empty() || subset.iter().any(|&j| j >= ncols) {
        return domain(format!("max-linear subset {subset:?} invalid for {ncols} columns"));
    }
    let mut terms = Vec::with_capacity(phi.len());
    for l in phi {
        let mut denom = 0.0;
        for m in phi {
            let mut worst = 0.0_f64;
            for &j in subset {
                let ratio = match (m[j] > 0.0, l[j] > 0.0) {
                    (false, _) => 0.0,
                    (true, false) => f64::INFINITY,
                    (true, true) => m[j] / l[j],
                };
                worst = worst.max(ratio);
            }
            denom += worst;
        }
        terms.push(if denom > 0.0 && denom.is_finite() { 1.0 / denom } else { 0.0 });
    }
    Ok((terms.iter().sum(), terms))
}

/// Extremal process: p(s_1, …, s_k) = s_1/s_k for 0 < s_1 < … < s_k ≤ 1.
pub fn ecp_extremal_process(sites: &[f64]) -> Result<f64> {
    if sites.is_empty() {
        return domain("extremal process concurrence needs at least one site");
    }
    if !(sites[0] > 0.0) || sites[sites.len() - 1] > 1.0 {
        return domain("extremal process sites must lie in (0, 1]");
    }
    if sites.windows(2).any(|w| !(w[0] < w[1])) {
        return domain(format!("extremal process sites must be strictly increasing: {sites:?}"));
    }
    Ok(sites[0] / sites[sites.len() - 1])
}

/// Ball-indicator moving maxima: p(h) = c_A(h) / {2|A| − c_A(h)}.
pub fn ecp_ball_overlap(h: f64, r: f64, d: usize) -> Result<f64> {
    let x = crate::models::exponent::ball_overlap_fraction(h, r, d)?;
    Ok(x / (2.0 - x))
}

/// Pairwise extremal coefficient θ ∈ [1, 2] of the margin-standardised pair:
/// θ = V(a_1, a_2) with a_j = V at s_j alone (a_j = 1 for unit Fréchet
/// margins; the extremal process has a_j = s_j).
pub fn extremal_coefficient(model: &ModelSpec, s1: &[f64], s2: &[f64]) -> Result<f64> {
    let pair = SiteSet::new(vec![s1.to_vec(), s2.to_vec()])?;
    let a1 = exponent_v(model, &pair.subset(&[0])?, &[1.0])?;
    let a2 = exponent_v(model, &pair.subset(&[1])?, &[1.0])?;
    exponent_v(model, &pair, &[a1, a2])
}

/// Closed-form concurrence probability for the whole site set, when the
/// model has one.
pub fn ecp_closed_form(model: &ModelSpec, sites: &SiteSet) -> Result<Option<f64>> {
    model.validate()?;
    let k = sites.len();
    if k == 1 {
        return Ok(Some(1.0));
    }
    Ok(match model {
        ModelSpec::Logistic { alpha } => Some(ecp_logistic(*alpha, k)?),
        ModelSpec::MaxLinear { phi } => {
            let cols = crate::models::max_linear_columns(sites, phi[0].len())?;
            Some(ecp_max_linear(phi, &cols)?.0)
        }
        ModelSpec::ExtremalProcess {} => {
            let mut s: Vec<f64> = sites.coords().iter().map(|c| c[0]).collect();
            if sites.dim() != 1 {
                return domain("extremal process sites must be 1-dimensional");
            }
            s.sort_by(f64::total_cmp);
            Some(ecp_extremal_process(&s)?)
        }
        ModelSpec::BallIndicator { radius, dim } if k == 2 => {
            Some(ecp_ball_overlap(sites.distance(0, 1), *radius, *dim)?)
        }
        ModelSpec::BallIndicator { radius, dim: 1 } => {
            // |∩ intervals| / |∪ intervals| on the line
            let mut s: Vec<f64> = sites.coords().iter().map(|c| c[0]).collect();
            s.sort_by(f64::total_cmp);
            let r = *radius;
            let inter = (2.0 * r - (s[k - 1] - s[0])).max(0.0);
            let mut union = 0.0;
            let (mut lo, mut hi) = (s[0] - r, s[0] + r);
            for &x in &s[1..] {
                if x - r > hi {
                    union += hi - lo;
                    lo = x - r;
                }
                hi = x + r;
            }
            union += hi - lo;
            Some(inter / union)
        }
        _ => None,
    })
}

/// Deterministic pairwise concurrence probability p(s_1, s_2): closed form
/// where available, otherwise quadrature of the Brown–Resnick or
/// extremal-t integrand.
pub fn pairwise_p(model: &ModelSpec, pair: &SiteSet) -> Result<f64> {
    if pair.len() != 2 {
        return domain(format!("pairwise_p needs exactly 2 sites, got {}", pair.len()));
    }
    if let Some(p) = ecp_closed_form(model, pair)? {
        return Ok(p);
    }
    match model {
        ModelSpec::BrownResnick { .. } | ModelSpec::Smith { .. } => {
            let gamma = model.br_gamma(&pair.lag(0, 1))?.unwrap_or(0.0);
            Ok(ecp_brown_resnick_quadrature(gamma))
        }
        ModelSpec::ExtremalT { correlation, nu } => {
            ecp_extremal_t_quadrature(correlation.eval(pair.distance(0, 1)), *nu)
        }
        _ => capability(format!("no pairwise evaluator for {}", model.name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_examples() {
        assert_eq!(ecp_logistic(0.5, 2).unwrap(), 0.5);
        assert_eq!(ecp_logistic(1.0, 5).unwrap(), 0.0);
        assert!((ecp_logistic(0.5, 3).unwrap() - 0.375).abs() < 1e-15);
        assert!(ecp_logistic(0.5, 1).is_err());
        // Γ(k − α) / {Γ(k) Γ(1 − α)}
        for &(a, k) in &[(0.3, 2usize), (0.7, 4), (0.25, 6)] {
            let g = crate::specfun::gamma;
            let via_gamma = g(k as f64 - a) / (g(k as f64) * g(1.0 - a));
            assert!((ecp_logistic(a, k).unwrap() - via_gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn logistic_monotone_in_alpha_and_k() {
        for k in 2..8 {
            let mut prev = 1.0;
            for i in 1..=20 {
                let p = ecp_logistic(i as f64 / 20.0, k).unwrap();
                assert!(p <= prev);
                prev = p;
                assert!(ecp_logistic(i as f64 / 20.0, k + 1).unwrap() <= p);
            }
        }
    }

    #[test]
    fn max_linear_examples() {
        let (p, terms) = ecp_max_linear(&[vec![0.5, 0.5], vec![0.5, 0.5]], &[0, 1]).unwrap();
        assert_eq!(terms, vec![0.5, 0.5]);
        assert_eq!(p, 1.0);
        let (p, _) = ecp_max_linear(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]).unwrap();
        assert_eq!(p, 0.0);
        // φ = [[.75,.25],[.25,.75]]: p_1 = 1/(1 + max(1/3, 3)) = 1/4 each
        let (p, terms) = ecp_max_linear(&[vec![0.75, 0.25], vec![0.25, 0.75]], &[0, 1]).unwrap();
        assert!((terms[0] - 0.25).abs() < 1e-15 && (p - 0.5).abs() < 1e-15);
        assert!(ecp_max_linear(&[vec![1.0]], &[1]).is_err());
    }

    #[test]
    fn extremal_process_examples() {
        assert!((ecp_extremal_process(&[0.2, 0.5]).unwrap() - 0.4).abs() < 1e-15);
        assert!((ecp_extremal_process(&[0.1, 0.2, 0.5]).unwrap() - 0.2).abs() < 1e-15);
        assert!(ecp_extremal_process(&[0.5, 0.2]).is_err());
        assert!(ecp_extremal_process(&[0.3, 0.3]).is_err());
        assert!(ecp_extremal_process(&[0.3, 0.3 + 1e-12]).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn ball_overlap_examples() {
        assert_eq!(ecp_ball_overlap(0.0, 1.0, 3).unwrap(), 1.0);
        assert_eq!(ecp_ball_overlap(2.0, 1.0, 3).unwrap(), 0.0);
        assert_eq!(ecp_ball_overlap(5.0, 1.0, 2).unwrap(), 0.0);
        assert!((ecp_ball_overlap(0.5, 1.0, 1).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn ball_one_dim_k_sites_matches_pairwise() {
        let m = ModelSpec::BallIndicator { radius: 1.0, dim: 1 };
        let pair = SiteSet::line(&[0.0, 0.5]).unwrap();
        assert!((ecp_closed_form(&m, &pair).unwrap().unwrap() - 0.6).abs() < 1e-12);
        // sites 0, 0.5, 1: ∩ = [0, 1] (length 1), ∪ = [−1, 2] (length 3)
        let three = SiteSet::line(&[0.0, 1.0, 0.5]).unwrap();
        assert!((ecp_closed_form(&m, &three).unwrap().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn extremal_coefficients() {
        let a = [0.0];
        let b = [1.0];
        assert_eq!(extremal_coefficient(&ModelSpec::Logistic { alpha: 1.0 }, &a, &b).unwrap(), 2.0);
        for &alpha in &[0.1, 0.5, 0.9] {
            let t = extremal_coefficient(&ModelSpec::Logistic { alpha }, &a, &b).unwrap();
            assert!((t - 2f64.powf(alpha)).abs() < 1e-14);
        }
        // margins of scale s: P(η(.2) ≤ .2, η(.5) ≤ .5) = exp(−(.2·5 + .3·2))
        let t = extremal_coefficient(&ModelSpec::ExtremalProcess {}, &[0.2], &[0.5]).unwrap();
        assert!((t - 1.6).abs() < 1e-14);
    }
}
