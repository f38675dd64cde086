//! Analysis calculators and Monte Carlo oracles.

mod balls;
pub mod precision;
mod quantities;
pub mod stats;

pub use balls::{balls_in_bins_singletons, expected_singletons, singleton_tail_estimate};
pub use quantities::{
    AnalysisError, AnalysisQuantities, M_DIVERGENCE_WARNING, M_SINGULARITY_GAP,
    OFA_ADDITIVE_CONSTANT, compute_quantities, ebobo_bound, fit_additive_constant, gamma,
    ofa_bound, ofa_makespan_bound, s_value, success_probability, tau,
};
pub use stats::{KsResult, ks_two_sample};
