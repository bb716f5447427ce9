//! Special functions and random-sampling primitives shared by every module.

mod linalg;
mod quad;
mod rng;
mod sampling;
mod special;
pub mod stats;

pub use linalg::{CovarianceMatrix, GaussianSampler};
pub use quad::{integrate, integrate_to_infinity};
pub use rng::SeededRng;
pub use sampling::{gaussian_vector, sample_positive_stable, sample_student_t};
pub use special::{
    gamma, ln_gamma, log_binom_ratio, normal_cdf, normal_pdf, reg_inc_beta, student_cdf,
};
