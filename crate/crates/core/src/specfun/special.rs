use crate::error::{domain, Result};
use std::f64::consts::{PI, SQRT_2};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)| (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// erf(z) for |z| < 3 from the positive-term series
/// erf z = 2/√π e^{-z²} Σ 2ⁿ z^{2n+1} / (2n+1)!!.
fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * (-z2).exp() * sum
}

/// erfc(z) for z ≥ 3 by Lentz evaluation of the Laplace continued fraction.
fn erfc_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..500 {
        let a = j as f64 * 0.5;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

/// Standard normal CDF Φ(x), absolute error below 1e-15 on the real line.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let z = x / SQRT_2;
    if z.abs() < 3.0 {
        0.5 + 0.5 * erf_series(z)
    } else if z > 0.0 {
        if z.is_infinite() {
            return 1.0;
        }
        1.0 - 0.5 * erfc_cf(z)
    } else {
        if z.is_infinite() {
            return 0.0;
        }
        0.5 * erfc_cf(-z)
    }
}

/// Continued fraction for the incomplete beta ratio (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b), the Beta(a, b) CDF.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return domain(format!("incomplete beta needs a, b > 0 (got a={a}, b={b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("incomplete beta argument {x} outside [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Student-t CDF with `dof` degrees of freedom (any positive real).
pub fn student_cdf(x: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return domain(format!("student_cdf needs dof > 0 (got {dof})"));
    }
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { 1.0 } else { 0.0 });
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let t = dof / (dof + x * x);
    let tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, t)?;
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

/// The ratio C(d, m−1) / C(n, m), accumulated in log space.
///
/// This is the weight of observation `i` with `d` strictly dominated
/// observations in the permutation-averaged block estimator. Exactly zero
/// when `d < m − 1`.
pub fn log_binom_ratio(d: usize, m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 || m > n {
        return domain(format!("log_binom_ratio needs 1 <= m <= n (m={m}, n={n})"));
    }
    if d >= n {
        return domain(format!("log_binom_ratio needs d <= n-1 (d={d}, n={n})"));
    }
    if d + 1 < m {
        return Ok(0.0);
    }
    // C(d,m-1)/C(n,m) = m/(n-m+1) * prod_{i<m-1} (d-i)/(n-i)
    let mut log_ratio = (m as f64).ln() - ((n - m + 1) as f64).ln();
    for i in 0..m - 1 {
        log_ratio += ((d - i) as f64).ln() - ((n - i) as f64).ln();
    }
    Ok(log_ratio.exp())
}
