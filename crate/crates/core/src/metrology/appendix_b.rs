use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sld::{sld_qfi, state_derivative, STATE_STEP};
use crate::error::{Error, Result};
use crate::liouville::{apply_local, gad_liouvillian, GadParams};
use crate::opalg::{CMatrix, DensityMatrix, C64};

/// Reduced state of a Haar-random pure state on `dim ⊗ dim`.
pub fn random_density<R: rand::Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DensityMatrix::new(rho.scale(1.0 / tr)).expect("Gram matrix is a state")
}

/// `Λθ(t)^{⊗n}[input]` on `n` qubits.
pub fn channel_output(theta: f64, gamma: f64, t: f64, input: &CMatrix, n_copies: usize) -> Result<CMatrix> {
    let prop = gad_liouvillian(&GadParams::new(theta, gamma)?).propagator(t)?;
    (0..n_copies).try_fold(input.clone(), |acc, site| apply_local(&prop, &acc, site, n_copies))
}

/// QFI of `θ ↦ Λθ(t)^{⊗n}[input(θ)]`.
pub fn channel_output_qfi(
    theta: f64,
    gamma: f64,
    t: f64,
    input: impl Fn(f64) -> Result<CMatrix>,
    n_copies: usize,
) -> Result<f64> {
    let family = |th: f64| channel_output(th, gamma, t, &input(th)?, n_copies);
    let rho = DensityMatrix::new(crate::opalg::hermitian_part(&family(theta)?))?;
    let d_rho = state_derivative(family, theta, STATE_STEP)?;
    Ok(sld_qfi(&rho, &d_rho)?.qfi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixBReport {
    pub theta: f64,
    pub gamma: f64,
    pub n_copies: usize,
    pub samples: usize,
    pub max_qfi: f64,
    /// `n/(θ(1−θ))`.
    pub bound: f64,
}

impl AppendixBReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_qfi <= self.bound + tol
    }
}

/// Largest QFI over seeded random (θ-independent) inputs sent through
/// `Λθ(t)^{⊗n}`, for every `t` in `t_list`.
pub fn appendix_b_optimality_check(
    theta: f64,
    gamma: f64,
    t_list: &[f64],
    n_copies: usize,
    n_random: usize,
    seed: u64,
) -> Result<AppendixBReport> {
    if !(1..=2).contains(&n_copies) {
        return Err(Error::InvalidParameter(format!("n_copies = {n_copies}, expected 1 or 2")));
    }
    GadParams::new(theta, gamma)?;
    let dim = 1usize << n_copies;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_qfi: f64 = 0.0;
    for _ in 0..n_random {
        let input = random_density(dim, &mut rng).into_inner();
        for &t in t_list {
            let q = channel_output_qfi(theta, gamma, t, |_| Ok(input.clone()), n_copies)?;
            max_qfi = max_qfi.max(q);
        }
    }
    Ok(AppendixBReport {
        theta,
        gamma,
        n_copies,
        samples: n_random * t_list.len(),
        max_qfi,
        bound: n_copies as f64 / (theta * (1.0 - theta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steady(th: f64, n: usize) -> Result<CMatrix> {
        let one = GadParams::new(th, 1.0)?.steady_state().into_inner();
        Ok(if n == 1 { one.clone() } else { one.kronecker(&one) })
    }

    #[test]
    fn steady_input_saturates_bound() {
        for t in [0.0, 0.3, 2.0] {
            let q = channel_output_qfi(0.3, 2.0, t, |th| steady(th, 1), 1).unwrap();
            assert!((q - 1.0 / 0.21).abs() < 1e-6, "{t}: {q}");
        }
        let q = channel_output_qfi(0.3, 2.0, 0.0, |th| steady(th, 2), 2).unwrap();
        assert!((q - 2.0 / 0.21).abs() < 1e-6);
    }

    #[test]
    fn random_inputs_respect_bound() {
        let g = 2.0;
        let ts: Vec<f64> = [0.0, 0.2, 1.0, 5.0].iter().map(|x| x / g).collect();
        for n in [1, 2] {
            let r = appendix_b_optimality_check(0.3, g, &ts, n, 50, 9).unwrap();
            assert!(r.holds(1e-6), "{r:?}");
            assert!(r.max_qfi > 0.0);
        }
        assert!(appendix_b_optimality_check(0.3, g, &ts, 3, 1, 9).is_err());
    }

    #[test]
    fn random_states_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        let x = random_density(4, &mut a);
        assert_eq!(x, random_density(4, &mut b));
        assert_eq!(x.dim(), 4);
    }
}
