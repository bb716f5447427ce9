use super::{max_linear_columns, ModelSpec, SiteSet};
use crate::error::{capability, domain, Result};
use crate::specfun::{normal_cdf, reg_inc_beta, student_cdf};

/// Exponent function V with P{η(s_j) ≤ z_j, j ≤ k} = exp{−V(z)}.
///
/// Closed forms exist for any k under the logistic, max-linear and
/// extremal-process models; Brown–Resnick, Smith, extremal-t and the ball
/// indicator are bivariate only and return a capability error for k > 2.
pub fn exponent_v(model: &ModelSpec, sites: &SiteSet, z: &[f64]) -> Result<f64> {
    let k = sites.len();
    if z.len() != k {
        return domain(format!("z has {} entries for {k} sites", z.len()));
    }
    if z.iter().any(|v| !(*v > 0.0) || v.is_nan()) {
        return domain("exponent function needs strictly positive z");
    }
    match model {
        ModelSpec::Logistic { alpha } => {
            if *alpha == 1.0 {
                return Ok(z.iter().map(|v| 1.0 / v).sum());
            }
            let s: f64 = z.iter().map(|v| v.powf(-1.0 / alpha)).sum();
            Ok(s.powf(*alpha))
        }
        ModelSpec::MaxLinear { phi } => {
            let cols = max_linear_columns(sites, phi[0].len())?;
            Ok(phi
                .iter()
                .map(|row| {
                    cols.iter()
                        .zip(z)
                        .map(|(&c, zj)| row[c] / zj)
                        .fold(0.0, f64::max)
                })
                .sum())
        }
        ModelSpec::ExtremalProcess {} => {
            let mut pts: Vec<(f64, f64)> = Vec::with_capacity(k);
            for (j, &zj) in z.iter().enumerate() {
                let s = sites.site(j)[0];
                if sites.dim() != 1 || !(s > 0.0 && s <= 1.0) {
                    return domain(format!("extremal process sites must lie in (0,1], got {s}"));
                }
                pts.push((s, zj));
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            // V = Σ_j (s_(j) − s_(j−1)) · max_{i ≥ j} 1/z_(i)
            let mut v = 0.0;
            let mut tail_max = 0.0_f64;
            for j in (0..k).rev() {
                tail_max = tail_max.max(1.0 / pts[j].1);
                let prev = if j == 0 { 0.0 } else { pts[j - 1].0 };
                v += (pts[j].0 - prev) * tail_max;
            }
            Ok(v)
        }
        _ if k == 1 => Ok(1.0 / z[0]),
        _ if k > 2 => capability(format!(
            "exponent function for {} is implemented for k <= 2 only (k={k})",
            model.name()
        )),
        ModelSpec::BrownResnick { .. } | ModelSpec::Smith { .. } => {
            let gamma = model.br_gamma(&sites.lag(0, 1))?.unwrap_or(0.0);
            Ok(brown_resnick_v(gamma, z[0], z[1]))
        }
        ModelSpec::ExtremalT { correlation, nu } => {
            let rho = correlation.eval(sites.distance(0, 1));
            extremal_t_v(rho, *nu, z[0], z[1])
        }
        ModelSpec::BallIndicator { radius, dim } => {
            let x = ball_overlap_fraction(sites.distance(0, 1), *radius, *dim)?;
            let (a, b) = (1.0 / z[0], 1.0 / z[1]);
            Ok(x * a.max(b) + (1.0 - x) * (a + b))
        }
    }
}

/// Bivariate Hüsler–Reiss / Brown–Resnick exponent function.
pub(crate) fn brown_resnick_v(gamma: f64, z1: f64, z2: f64) -> f64 {
    if gamma <= 0.0 {
        return (1.0 / z1).max(1.0 / z2);
    }
    if gamma.is_infinite() {
        return 1.0 / z1 + 1.0 / z2;
    }
    let a = (2.0 * gamma).sqrt();
    let l = (z2 / z1).ln();
    normal_cdf(a / 2.0 + l / a) / z1 + normal_cdf(a / 2.0 - l / a) / z2
}

/// Bivariate extremal-t exponent function.
pub(crate) fn extremal_t_v(rho: f64, nu: f64, z1: f64, z2: f64) -> Result<f64> {
    if rho >= 1.0 {
        return Ok((1.0 / z1).max(1.0 / z2));
    }
    let sigma = ((1.0 - rho * rho) / (nu + 1.0)).sqrt();
    let r = (z2 / z1).powf(1.0 / nu);
    Ok(student_cdf((r - rho) / sigma, nu + 1.0)? / z1
        + student_cdf((1.0 / r - rho) / sigma, nu + 1.0)? / z2)
}

/// |A ∩ (h + A)| / |A| for the Euclidean ball A of radius `r` in R^d.
///
/// The cap-volume identity gives B_{(d+1)/2, 1/2}(1 − h²/(4r²)) for
/// h ≤ 2r, and 0 beyond.
pub(crate) fn ball_overlap_fraction(h: f64, r: f64, d: usize) -> Result<f64> {
    if !(h >= 0.0) || !(r > 0.0) || d == 0 {
        return domain(format!("ball overlap needs h >= 0, r > 0, d >= 1 (h={h}, r={r}, d={d})"));
    }
    if h >= 2.0 * r {
        return Ok(0.0);
    }
    let x = 1.0 - h * h / (4.0 * r * r);
    reg_inc_beta((d as f64 + 1.0) / 2.0, 0.5, x)
}
