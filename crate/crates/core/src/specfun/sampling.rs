use super::linalg::{CovarianceMatrix, GaussianSampler};
use super::rng::SeededRng;
use crate::error::{domain, Result};
use rand_distr::{Distribution, Exp1, StudentT};
use std::f64::consts::PI;

/// One-sided α-stable draw with Laplace transform E[exp(−tS)] = exp(−t^α),
/// from Kanter's representation
/// S = sin(αU) / sin(U)^{1/α} · {sin((1−α)U) / E}^{(1−α)/α},
/// with U ~ U(0, π) and E ~ Exp(1).
pub fn sample_positive_stable(alpha: f64, rng: &mut SeededRng) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("positive stable index must be in (0,1), got {alpha}"));
    }
    let u = PI * rng.uniform_open();
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    Ok(a * b)
}

/// A single zero-mean Gaussian vector with covariance `cov`.
///
/// Repeated draws from one covariance should use [`GaussianSampler`]
/// directly to avoid refactorising.
pub fn gaussian_vector(cov: &CovarianceMatrix, rng: &mut SeededRng) -> Result<Vec<f64>> {
    Ok(GaussianSampler::new(cov)?.sample(rng))
}

pub fn sample_student_t(dof: f64, rng: &mut SeededRng) -> Result<f64> {
    match StudentT::new(dof) {
        Ok(d) if dof > 0.0 => Ok(d.sample(rng)),
        _ => domain(format!("student-t needs dof > 0, got {dof}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_mean(alpha: f64, t: f64, n: usize, seed: u64) -> f64 {
        let mut rng = SeededRng::new(seed, 0);
        (0..n)
            .map(|_| (-t * sample_positive_stable(alpha, &mut rng).unwrap()).exp())
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let m = laplace_mean(0.5, 1.0, 1_000_000, 1);
        assert!((m - (-1.0_f64).exp()).abs() < 0.005, "{m}");
        let m = laplace_mean(0.3, 2.0, 1_000_000, 2);
        assert!((m - (-(2.0_f64).powf(0.3)).exp()).abs() < 0.005, "{m}");
    }

    #[test]
    fn positive_stable_near_one_is_degenerate() {
        let mut rng = SeededRng::new(5, 0);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sample_positive_stable(0.999, &mut rng).unwrap())
            .collect();
        let mut sorted = draws.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[5_000];
        assert!((median - 1.0).abs() < 0.01, "median {median}");
    }

    #[test]
    fn positive_stable_domain() {
        let mut rng = SeededRng::new(5, 0);
        for a in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(sample_positive_stable(a, &mut rng).is_err());
        }
    }

    #[test]
    fn gaussian_vector_degenerate_cases() {
        let mut rng = SeededRng::new(9, 0);
        let zero = CovarianceMatrix::new(vec![vec![0.0]]).unwrap();
        for _ in 0..100 {
            assert_eq!(gaussian_vector(&zero, &mut rng).unwrap(), vec![0.0]);
        }
        let ones = CovarianceMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for _ in 0..100 {
            let v = gaussian_vector(&ones, &mut rng).unwrap();
            assert!((v[0] - v[1]).abs() <= 1e-9);
        }
    }

    #[test]
    fn gaussian_vector_empirical_covariance() {
        let cov = CovarianceMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let sampler = GaussianSampler::new(&cov).unwrap();
        let mut rng = SeededRng::new(10, 0);
        let n = 100_000;
        let mut s01 = 0.0;
        let mut s02 = 0.0;
        for _ in 0..n {
            let v = sampler.sample(&mut rng);
            s01 += v[0] * v[1];
            s02 += v[0] * v[2];
        }
        assert!((s01 / n as f64).abs() < 0.01);
        assert!((s02 / n as f64).abs() < 0.01);

        let cov = CovarianceMatrix::new(vec![vec![2.0, 0.8], vec![0.8, 1.0]]).unwrap();
        let sampler = GaussianSampler::new(&cov).unwrap();
        let mut acc = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let v = sampler.sample(&mut rng);
            let p = [v[0] * v[0], v[0] * v[1], v[1] * v[1]];
            for k in 0..3 {
                acc[k] += p[k];
                sq[k] += p[k] * p[k];
            }
        }
        let target = [2.0, 0.8, 1.0];
        for k in 0..3 {
            let mean = acc[k] / n as f64;
            let se = ((sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - target[k]).abs() < 3.0 * se, "entry {k}: {mean}");
        }
    }
}
