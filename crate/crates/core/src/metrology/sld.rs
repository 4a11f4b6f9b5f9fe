use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::opalg::{check_finite, check_hermitian, hermitian_part, CMatrix, DensityMatrix, C64};

const SUPPORT_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// Symmetric logarithmic derivative and the quantum Fisher information.
#[derive(Debug, Clone, PartialEq)]
pub struct SldResult {
    pub sld: CMatrix,
    pub qfi: f64,
    pub d_rho: CMatrix,
}

/// Solves `½(Lρ + ρL) = ∂ρ` in the eigenbasis of `ρ`.
pub fn sld_qfi(rho: &DensityMatrix, d_rho: &CMatrix) -> Result<SldResult> {
    let d = rho.dim();
    if d_rho.nrows() != d || d_rho.ncols() != d {
        return Err(Error::DimensionMismatch("state and derivative differ in dimension".into()));
    }
    check_finite(d_rho, "state derivative")?;
    check_hermitian(d_rho, RANK_TOL)?;
    let tr = d_rho.trace();
    if tr.norm() > RANK_TOL {
        return Err(Error::InvalidParameter(format!("state derivative has trace {tr}")));
    }
    let eig = SymmetricEigen::new(hermitian_part(rho.matrix()));
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let dr = v.adjoint() * d_rho * v;
    let mut l = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let den = lam[i] + lam[j];
            if den < SUPPORT_TOL {
                if dr[(i, j)].norm() > RANK_TOL {
                    return Err(Error::RankDeficient {
                        entry: dr[(i, j)].norm(),
                        denominator: den,
                    });
                }
            } else {
                l[(i, j)] = dr[(i, j)] * (2.0 / den);
            }
        }
    }
    let sld = hermitian_part(&(v * l * v.adjoint()));
    let qfi = (rho.matrix() * &sld * &sld).trace().re.max(0.0);
    Ok(SldResult {
        sld,
        qfi,
        d_rho: d_rho.clone(),
    })
}

/// `A_opt = θ𝟙 + L/H`.
pub fn optimal_observable(rho: &DensityMatrix, d_rho: &CMatrix, theta: f64) -> Result<CMatrix> {
    let s = sld_qfi(rho, d_rho)?;
    if s.qfi <= f64::MIN_POSITIVE {
        return Err(Error::ZeroQfi);
    }
    let d = rho.dim();
    Ok(CMatrix::identity(d, d) * C64::new(theta, 0.0) + s.sld.scale(1.0 / s.qfi))
}

/// Central difference `(ρ(θ+h) − ρ(θ−h)) / 2h`, Hermitized.
pub fn state_derivative(
    family: impl Fn(f64) -> Result<CMatrix>,
    theta: f64,
    h: f64,
) -> Result<CMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h}")));
    }
    let plus = family(theta + h)?;
    let minus = family(theta - h)?;
    Ok(hermitian_part(&(plus - minus).scale(0.5 / h)))
}

/// Step used for state families.
pub const STATE_STEP: f64 = 1e-5;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::GadParams;
    use crate::opalg::{max_abs, vectorize};
    use crate::qubit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gad_family(th: f64) -> Result<CMatrix> {
        Ok(GadParams::new(th, 1.0)?.steady_state().into_inner())
    }

    /// QFI by solving the Lyapunov equation as a linear system.
    fn lyapunov_qfi(rho: &CMatrix, d_rho: &CMatrix) -> f64 {
        let d = rho.nrows();
        let id = CMatrix::identity(d, d);
        let op = (id.kronecker(rho) + rho.transpose().kronecker(&id)).scale(0.5);
        let l = op.lu().solve(&vectorize(d_rho).unwrap()).unwrap();
        let l = CMatrix::from_column_slice(d, d, l.as_slice());
        (rho * &l * &l).trace().re
    }

    #[test]
    fn gad_sld_and_qfi() {
        for k in 1..10 {
            let th = k as f64 / 10.0;
            let rho = GadParams::new(th, 1.0).unwrap().steady_state();
            let dr = state_derivative(gad_family, th, STATE_STEP).unwrap();
            let s = sld_qfi(&rho, &dr).unwrap();
            let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(1.0 / th, 0.0),
                C64::new(-1.0 / (1.0 - th), 0.0),
            ]));
            assert!(max_abs(&(&s.sld - want)) < 1e-9);
            assert!((s.qfi - 1.0 / (th * (1.0 - th))).abs() < 1e-9);
            let a = optimal_observable(&rho, &dr, th).unwrap();
            assert!(max_abs(&(&a - qubit::projector(0))) < 1e-10);
            assert!((rho.expectation(&a) - th).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_derivative() {
        let rho = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        let s = sld_qfi(&rho, &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(s.qfi, 0.0);
        assert_eq!(max_abs(&s.sld), 0.0);
        assert!(matches!(optimal_observable(&rho, &CMatrix::zeros(2, 2), 0.4), Err(Error::ZeroQfi)));
    }

    #[test]
    fn rank_deficient_support_is_rejected() {
        let rho = DensityMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        let mut dr = CMatrix::zeros(3, 3);
        dr[(1, 1)] = C64::new(0.5, 0.0);
        dr[(2, 2)] = C64::new(-0.5, 0.0);
        assert!(matches!(sld_qfi(&rho, &dr), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn sld_equation_holds_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = CMatrix::from_fn(3, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let rho = &g * g.adjoint();
            let rho = rho.scale(1.0 / rho.trace().re);
            let h = CMatrix::from_fn(3, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let mut dr = hermitian_part(&h);
            let shift = dr.trace() / C64::new(3.0, 0.0);
            for i in 0..3 {
                dr[(i, i)] -= shift;
            }
            let s = sld_qfi(&DensityMatrix::new(rho.clone()).unwrap(), &dr).unwrap();
            let lhs = (&s.sld * &rho + &rho * &s.sld).scale(0.5);
            assert!(max_abs(&(lhs - &dr)) < 1e-8);
            assert!((s.qfi - lyapunov_qfi(&rho, &dr)).abs() < 1e-8 * s.qfi.max(1.0));
        }
    }
}
