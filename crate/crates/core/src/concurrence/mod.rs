//! Extremal concurrence probabilities: closed forms, deterministic
//! quadrature and Monte-Carlo evaluation, extremal coefficients and
//! integrated concurrence over a domain.

mod cell;
mod closed;
mod mc;

pub use cell::{cell_measure, integrated_cp, rectangle_weights};
pub use closed::{
    ecp_ball_overlap, ecp_closed_form, ecp_extremal_process, ecp_logistic, ecp_max_linear,
    extremal_coefficient, pairwise_p,
};
pub use mc::{
    brown_resnick_integrand, ecp_brown_resnick_quadrature, ecp_extremal_t_quadrature, ecp_mc,
    extremal_t_integrand, DEFAULT_BATCH,
};

use serde::{Deserialize, Serialize};

/// How a [`ConcurrenceEstimate`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    /// Deterministic quadrature of the Monte-Carlo integrand.
    Quadrature,
    McPlain,
    McAntithetic,
    SimulationFrequency,
}

/// A concurrence probability with its Monte-Carlo standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceEstimate {
    pub value: f64,
    /// Zero for closed forms and quadrature.
    pub stderr: f64,
    pub n_draws: u64,
    pub method: Method,
}

impl ConcurrenceEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            stderr: 0.0,
            n_draws: 0,
            method,
        }
    }
}
