use crate::error::{domain, Result};

/// Integrated concurrence probability I(s_0) = Σ_g w_g · p(s_0, s_g),
/// a quadrature of ∫ p(s_0, s) ds. Its value equals the expected measure
/// of the concurrence cell of s_0 under the same weights.
pub fn integrated_cp(pairwise_p: &[f64], weights: &[f64]) -> Result<f64> {
    if pairwise_p.len() != weights.len() {
        return domain(format!(
            "{} probabilities for {} grid weights",
            pairwise_p.len(),
            weights.len()
        ));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return domain("grid weights must be positive and finite");
    }
    if pairwise_p.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return domain("pairwise probabilities must lie in [0, 1]");
    }
    Ok(pairwise_p.iter().zip(weights).map(|(p, w)| p * w).sum())
}

/// Rectangle-rule weights for `n` points of a regular grid with spacing
/// `step` in `dim` dimensions: each point carries a cell of volume stepᵈ.
pub fn rectangle_weights(n: usize, step: f64, dim: usize) -> Vec<f64> {
    vec![step.powi(dim as i32); n]
}

/// Measure of the cell of site `s0`: total weight of the sites sharing its
/// hitting label.
pub fn cell_measure(labels: &[usize], s0: usize, weights: &[f64]) -> f64 {
    let target = labels[s0];
    labels
        .iter()
        .zip(weights)
        .filter(|(l, _)| **l == target)
        .map(|(_, w)| w)
        .sum()
}
