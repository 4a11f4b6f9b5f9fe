//! Fisher information, POVMs and Monte Carlo estimation.

mod appendix_b;
mod estimate;
mod fisher;
mod povm;
mod sld;

pub use appendix_b::{
    appendix_b_optimality_check, channel_output, channel_output_qfi, random_density, AppendixBReport,
};
pub use estimate::{estimation_variance, sample_outcomes, EstimationRun, Sampler};
pub use fisher::{
    cfi, default_x_grid, fisher_report, gad_qfi, qcrb_violation_report, scheme_density, FisherReport,
    DISTRIBUTION_STEP,
};
pub use povm::{
    povm_adiabatic, povm_analytic_gad, povm_analytic_gad_with, povm_numeric, povm_small_t,
    small_t_density, Povm, PovmElement, COMPLETENESS_TOL, NU_NODES,
};
pub use sld::{optimal_observable, sld_qfi, state_derivative, SldResult, STATE_STEP};

/// How the pointer is coupled to the GAD qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Impulsive coupling, `T → 0`.
    PmIdeal,
    /// Adiabatic coupling, `T → ∞`.
    DamIdeal,
    /// Coupling for a finite time `t` (μs) at damping rate `gamma` (MHz).
    FiniteT { gamma: f64, t: f64 },
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Self::PmIdeal => "pm-ideal",
            Self::DamIdeal => "dam-ideal",
            Self::FiniteT { .. } => "finite-t",
        }
    }
}
