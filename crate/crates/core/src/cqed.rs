//! Driven, damped qubit read out through a dispersively coupled resonator.
//!
//! The coupling `χ a†a σ_z` is diagonal in photon number, so the joint
//! generator splits into qubit sectors `𝓛_total − iχ(n σ_z· − n′ ·σ_z)`, one per
//! Fock dyad `|n⟩⟨n′|`. The coupling is written `χ = 1/T`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liouville::{lindblad_liouvillian, Jump, LindbladModel};
use crate::opalg::{
    devectorize, expm, steady_state, unitary_exp, vectorize, CMatrix, DensityMatrix, Superoperator,
    DEFAULT_ZERO_TOL, EXPM_TOL, I,
};
use crate::pointer::{find_crossing, DeviationNorm};
use crate::qubit;

/// Allowed coherent-state mass beyond `n_max`.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedParams {
    /// Angular Rabi frequency (rad/μs).
    pub omega_r0: f64,
    pub alpha: f64,
    pub delta_omega: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nbar: f64,
    pub n_max: usize,
}

impl CqedParams {
    /// `ω_R0/2π = 2 MHz`, `α = 0`, `Δω = 0`, `n̄ = 16`, `γ₁ = γ₂ = gamma`,
    /// truncated at 48 photons.
    pub fn reference(gamma: f64) -> Result<Self> {
        Self {
            omega_r0: 2.0 * PI * 2.0,
            alpha: 0.0,
            delta_omega: 0.0,
            gamma1: gamma,
            gamma2: gamma,
            nbar: 16.0,
            n_max: 48,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let finite = [self.omega_r0, self.alpha, self.delta_omega, self.gamma1, self.gamma2, self.nbar]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite resonator parameters".into()));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 || self.nbar < 0.0 {
            return Err(Error::InvalidParameter("rates and n̄ must be non-negative".into()));
        }
        FockPointer::coherent(self.nbar, self.n_max)?;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.n_max = n_max;
        self.validated()
    }

    /// `H_q = −(ω/2)(cos α σ_x + sin α σ_y) − (Δω/2) σ_z`.
    pub fn hamiltonian(&self) -> CMatrix {
        (qubit::sigma_x().scale(self.alpha.cos()) + qubit::sigma_y().scale(self.alpha.sin()))
            .scale(-self.omega_r0 / 2.0)
            - qubit::sigma_z().scale(self.delta_omega / 2.0)
    }

    pub fn model(&self) -> Result<LindbladModel> {
        LindbladModel::new(
            self.hamiltonian(),
            vec![
                Jump { operator: qubit::sigma_minus(), rate: self.gamma1 },
                Jump { operator: qubit::sigma_z(), rate: self.gamma2 / 2.0 },
            ],
        )
    }
}

/// Coherent resonator state with real amplitude, truncated in photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct FockPointer {
    amplitudes: Vec<f64>,
}

impl FockPointer {
    /// `cₙ = e^{−n̄/2} n̄^{n/2} / √n!` for `n ≤ n_max`; errors if the dropped
    /// mass exceeds [`TAIL_TOL`].
    pub fn coherent(nbar: f64, n_max: usize) -> Result<Self> {
        let mut amplitudes = Vec::with_capacity(n_max + 1);
        let mut ln_c = -nbar / 2.0;
        for n in 0..=n_max {
            if n > 0 {
                ln_c += 0.5 * (nbar.ln() - (n as f64).ln());
            }
            amplitudes.push(if nbar == 0.0 { if n == 0 { 1.0 } else { 0.0 } } else { ln_c.exp() });
        }
        let mass: f64 = amplitudes.iter().map(|c| c * c).sum();
        let tail = (1.0 - mass).max(0.0);
        if tail > TAIL_TOL {
            return Err(Error::TruncationTail(tail));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.amplitudes.iter().map(|c| c * c).sum()
    }
}

pub fn cqed_total_liouvillian(p: &CqedParams) -> Result<Superoperator> {
    Ok(lindblad_liouvillian(&p.model()?))
}

fn check_sector(p: &CqedParams, n: usize, nn: usize) -> Result<()> {
    if n > p.n_max || nn > p.n_max {
        return Err(Error::InvalidParameter(format!(
            "sector ({n}, {nn}) outside 0..={}",
            p.n_max
        )));
    }
    Ok(())
}

fn sector_coupling(n: usize, nn: usize) -> CMatrix {
    let z = qubit::sigma_z();
    Superoperator::left(&z).matrix().scale(n as f64) - Superoperator::right(&z).matrix().scale(nn as f64)
}

/// `𝓛_total − iχ(n σ_z· − n′ ·σ_z)`.
pub fn cqed_sector_liouvillian(p: &CqedParams, chi: f64, n: usize, nn: usize) -> Result<Superoperator> {
    check_sector(p, n, nn)?;
    let l = cqed_total_liouvillian(p)?;
    Superoperator::new(2, l.matrix() - sector_coupling(n, nn) * (I * chi))
}

/// One row of the deviation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedRow {
    pub t: f64,
    pub pm: f64,
    pub dam: f64,
}

/// Precomputed pieces shared by every coupling time.
#[derive(Debug, Clone)]
pub struct CqedExperiment {
    params: CqedParams,
    liouvillian: Superoperator,
    rho: DensityMatrix,
    pointer: FockPointer,
    pm_ideal: CMatrix,
    dam_ideal: CMatrix,
    norm: DeviationNorm,
}

fn assemble(n: usize, block: impl Fn(usize, usize) -> Result<CMatrix> + Sync) -> Result<CMatrix> {
    let rows: Vec<Result<Vec<CMatrix>>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| block(i, j)).collect())
        .collect();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, b) in row?.into_iter().enumerate() {
            let j = i + k;
            m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&b);
            if j != i {
                m.view_mut((2 * j, 2 * i), (2, 2)).copy_from(&b.adjoint());
            }
        }
    }
    Ok(m)
}

impl CqedExperiment {
    pub fn new(params: CqedParams, norm: DeviationNorm) -> Result<Self> {
        let params = params.validated()?;
        let liouvillian = cqed_total_liouvillian(&params)?;
        let rho = steady_state(&liouvillian, DEFAULT_ZERO_TOL)?;
        let pointer = FockPointer::coherent(params.nbar, params.n_max)?;
        let c = pointer.amplitudes().to_vec();
        let n = c.len();
        let z = qubit::sigma_z();
        let mean_z = rho.expectation(&z);
        let kicks: Vec<CMatrix> = (0..n).map(|k| unitary_exp(&z, k as f64)).collect();
        let pm_ideal = assemble(n, |i, j| {
            Ok((&kicks[i] * rho.matrix() * kicks[j].adjoint()).scale(c[i] * c[j]))
        })?;
        let dam_ideal = assemble(n, |i, j| {
            Ok(rho.matrix() * ((-I * ((i as f64 - j as f64) * mean_z)).exp() * (c[i] * c[j])))
        })?;
        Ok(Self {
            params,
            liouvillian,
            rho,
            pointer,
            pm_ideal,
            dam_ideal,
            norm,
        })
    }

    pub fn params(&self) -> &CqedParams {
        &self.params
    }

    pub fn steady_state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn pointer(&self) -> &FockPointer {
        &self.pointer
    }

    /// Joint qubit–resonator state after coupling for `T = 1/χ`.
    pub fn evolved(&self, t: f64) -> Result<CMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling time T = {t}")));
        }
        let c = self.pointer.amplitudes();
        let l = self.liouvillian.matrix().scale(t);
        let rho = vectorize(self.rho.matrix())?;
        assemble(c.len(), |i, j| {
            let e = expm(&(&l - sector_coupling(i, j) * I), EXPM_TOL)?;
            Ok(devectorize(&(e * &rho), 2)?.scale(c[i] * c[j]))
        })
    }

    pub fn deviations(&self, t: f64) -> Result<CqedRow> {
        let s = self.evolved(t)?;
        Ok(CqedRow {
            t,
            pm: self.norm.of_hermitian(&(&s - &self.pm_ideal))?,
            dam: self.norm.of_hermitian(&(&s - &self.dam_ideal))?,
        })
    }

    /// Largest `1/T` (MHz) with the projective deviation at or below `tol`.
    pub fn pm_crossing(&self, tol: f64) -> Result<f64> {
        let t = find_crossing(|t| Ok(self.deviations(t)?.pm), 1e-9, 10.0, tol, 1e-3)?;
        Ok(1.0 / t)
    }

    /// Smallest `T` (μs) with the adiabatic deviation at or below `tol`.
    pub fn dam_crossing(&self, tol: f64) -> Result<f64> {
        find_crossing(|t| Ok(self.deviations(t)?.dam), 1e-2, 1e9, tol, 1e-3)
    }
}

/// Sweep of both deviations over coupling times.
pub fn cqed_deviation_measures(p: &CqedParams, t_list: &[f64], norm: DeviationNorm) -> Result<Vec<CqedRow>> {
    let exp = CqedExperiment::new(*p, norm)?;
    t_list.iter().map(|&t| exp.deviations(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{max_abs, spectral_info};

    #[test]
    fn coherent_tail() {
        let f = FockPointer::coherent(16.0, 48).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-10);
        assert!(matches!(FockPointer::coherent(16.0, 30), Err(Error::TruncationTail(_))));
        // Poisson weights: |c₁₆|² = e^{-16} 16^16 / 16!
        let want = (-16.0f64).exp() * 16f64.powi(16) / (1..=16).map(|k| k as f64).product::<f64>();
        assert!((f.amplitudes()[16].powi(2) - want).abs() < 1e-14);
    }

    #[test]
    fn closed_system_rabi_oscillation() {
        let p = CqedParams { gamma1: 0.0, gamma2: 0.0, ..CqedParams::reference(1.0).unwrap() };
        let l = cqed_total_liouvillian(&p).unwrap();
        let rho0 = qubit::projector(0);
        for t in [0.05, 0.1, 0.3] {
            let out = l.propagator(t).unwrap().apply(&rho0).unwrap();
            let want = (p.omega_r0 * t / 2.0).cos().powi(2);
            assert!((out[(0, 0)].re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_model_has_unique_steady_state() {
        let p = CqedParams::reference(5.0).unwrap();
        let l = cqed_total_liouvillian(&p).unwrap();
        let info = spectral_info(&l).unwrap();
        assert_eq!(info.zero_modes, 1);
        assert!(info.gap > 0.0);
        let rho = steady_state(&l, DEFAULT_ZERO_TOL).unwrap();
        let long = l.propagator(50.0 / p.gamma1).unwrap().apply(&qubit::projector(1)).unwrap();
        assert!(max_abs(&(long - rho.matrix())) < 1e-10);
        for t in [0.0, 1.0, 5.0, 10.0] {
            let out = l.propagator(t).unwrap().apply(&qubit::projector(0)).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sector_limits() {
        let p = CqedParams::reference(5.0).unwrap();
        let l = cqed_total_liouvillian(&p).unwrap();
        assert_eq!(cqed_sector_liouvillian(&p, 3.0, 0, 0).unwrap().matrix(), l.matrix());
        assert_eq!(cqed_sector_liouvillian(&p, 0.0, 7, 2).unwrap().matrix(), l.matrix());
        for n in [1, 10, 48] {
            let s = cqed_sector_liouvillian(&p, 2.0, n, n).unwrap();
            assert!(s.propagator(0.7).unwrap().channel_trace_defect() < 1e-10);
        }
        assert!(cqed_sector_liouvillian(&p, 1.0, 49, 0).is_err());
    }

    #[test]
    fn joint_state_is_normalized() {
        let exp = CqedExperiment::new(CqedParams::reference(5.0).unwrap(), DeviationNorm::default()).unwrap();
        for t in [0.0, 0.01, 1.0] {
            let s = exp.evolved(t).unwrap();
            assert!((s.trace().re - 1.0).abs() < 1e-9);
        }
        // T = 0 is the impulsive limit
        let row = exp.deviations(0.0).unwrap();
        assert!(row.pm < 1e-12);
    }
}
