//! Gaussian pointer coupled to a dissipative system.
//!
//! The apparatus is resolved in momentum: the joint state after a coupling
//! time `T` has blocks `φ(pᵢ)φ*(pⱼ) e^{T𝓛_{pᵢ,pⱼ}} ρθ`, one per pair of grid
//! nodes. The reading distribution follows by Fourier transforming back to the
//! position axis.

mod analysis;
mod distribution;
mod grid;
mod joint;

pub use analysis::{adiabatic_rate_check, count_peaks, find_crossing, log_log_slope, GadMeasurement};
pub use distribution::{pointer_distribution, PointerDistribution};
pub(crate) use grid::gaussian;
pub use grid::{GaussianApparatus, MomentumGrid, XGrid};
pub(crate) use joint::{phase, sector_exponent};
pub use joint::{
    deviation_measure, evolve_joint, evolve_joint_from, ideal_dam_state, ideal_pm_state,
    sector_liouvillian, sector_propagate, DeviationNorm, JointState,
};
