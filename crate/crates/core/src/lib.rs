//! Extremal concurrence probabilities of max-stable processes.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: special functions, seeded random streams, Gaussian sampling.
//! - [`models`]: max-stable model specifications, spectral profiles and
//!   exponent functions.
//! - [`simulate`]: Poisson spectral simulation with hitting-scenario tracking,
//!   exact logistic sampling and domain-of-attraction sampling.
//! - [`concurrence`]: closed forms and Monte-Carlo evaluation of concurrence
//!   probabilities, extremal coefficients and integrated concurrence.
//! - [`estimators`]: block, permutation-bootstrap, unbiased, Kendall-τ and
//!   log-based estimators, plus the block-size planner.
//! - [`pipeline`]: station-data ingestion, seasonal extremes, pairwise
//!   matrices, maps, cell areas and the simulation-study harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concurrence;
pub mod error;
pub mod estimators;
pub mod models;
pub mod pipeline;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
