//! Dense complex operator and superoperator numerics.
//!
//! Operators are `nalgebra` matrices of [`C64`]. Superoperators act on
//! column-stacked operators, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)` is the one
//! conversion rule used throughout the crate.

mod expm;
mod spectral;
mod superop;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use self::expm::expm;
pub(crate) use self::expm::one_norm;
pub use self::spectral::{spectral_info, steady_state, SpectralInfo, DEFAULT_ZERO_TOL};
pub use self::superop::Superoperator;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default normality tolerance handed to [`expm`] by the builders.
pub const EXPM_TOL: f64 = 1e-12;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Column-stacks a square operator.
pub fn vectorize(op: &CMatrix) -> Result<CVector> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot vectorize a {}x{} operator",
            op.nrows(),
            op.ncols()
        )));
    }
    // nalgebra stores matrices column-major
    Ok(CVector::from_column_slice(op.as_slice()))
}

/// Inverse of [`vectorize`] for a `d × d` operator.
pub fn devectorize(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not a {d}x{d} operator",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    check_finite(m, "trace_norm input")?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.clone().singular_values().iter().sum())
}

/// Trace norm of a Hermitian matrix via its eigenvalues (cheaper than SVD).
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    check_finite(m, "trace_norm input")?;
    let h = hermitian_part(m);
    Ok(SymmetricEigen::new(h).eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry of `|M − M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub(crate) fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("expected a square operator".into()));
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        Err(Error::NonHermitian(defect))
    } else {
        Ok(())
    }
}

/// `e^{-i s H}` for Hermitian `H` through its eigendecomposition.
pub fn unitary_exp(h: &CMatrix, s: f64) -> CMatrix {
    let eig = SymmetricEigen::new(hermitian_part(h));
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| (-I * (s * l)).exp()),
    );
    let v = &eig.eigenvectors;
    v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// A positive semidefinite, unit-trace, Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        check_finite(&m, "density matrix")?;
        check_hermitian(&m, Self::TOLERANCE)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TOLERANCE || tr.im.abs() > Self::TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr}"
            )));
        }
        let min = SymmetricEigen::new(hermitian_part(&m))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -Self::TOLERANCE {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self(m))
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(populations.len(), populations.iter().map(|&p| c(p)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub(crate) fn from_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// `tr(A ρ)`, real part.
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        (a * &self.0).trace().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn identity_vectorizes_to_column_stack() {
        let v = vectorize(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(v.as_slice(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        assert_eq!(devectorize(&v, 2).unwrap(), CMatrix::identity(2, 2));
    }

    #[test]
    fn lowering_operator_basis_element() {
        // σ₋ = |0⟩⟨1| sits at row 0, column 1 → index 0 + 2·1
        let v = vectorize(&qubit::sigma_minus()).unwrap();
        let expected: Vec<C64> = (0..4).map(|k| c(if k == 2 { 1.0 } else { 0.0 })).collect();
        assert_eq!(v.as_slice(), expected.as_slice());
    }

    #[test]
    fn sandwich_identity_matches_product() {
        for seed in 0..5 {
            let a = random(2, seed);
            let x = random(2, seed + 100);
            let b = random(2, seed + 200);
            let direct = vectorize(&(&a * &x * &b)).unwrap();
            let via = b.transpose().kronecker(&a) * vectorize(&x).unwrap();
            assert!((direct - via).camax() < 1e-14);
        }
    }

    #[test]
    fn devectorize_rejects_bad_length() {
        let v = CVector::zeros(5);
        assert!(devectorize(&v, 2).is_err());
        assert!(vectorize(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&CMatrix::identity(2, 2)).unwrap() - 2.0).abs() < 1e-14);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(-4.0)]));
        assert!((trace_norm(&d).unwrap() - 7.0).abs() < 1e-13);
        assert!((trace_norm_hermitian(&d).unwrap() - 7.0).abs() < 1e-13);
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_matches_gram_oracle() {
        for seed in 0..5 {
            let m = random(3, seed);
            let gram = m.adjoint() * &m;
            let oracle: f64 = SymmetricEigen::new(gram)
                .eigenvalues
                .iter()
                .map(|l| l.max(0.0).sqrt())
                .sum();
            let tn = trace_norm(&m).unwrap();
            assert!((tn - oracle).abs() < 1e-12);
            assert!((trace_norm(&m.adjoint()).unwrap() - tn).abs() < 1e-12);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal(&[0.3, 0.7]).is_ok());
        assert!(DensityMatrix::diagonal(&[0.3, 0.8]).is_err());
        assert!(matches!(
            DensityMatrix::diagonal(&[1.5, -0.5]),
            Err(Error::NegativeEigenvalue(_))
        ));
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NonHermitian(_))));
    }

    proptest! {
        #[test]
        fn vectorize_round_trip(d in 1usize..=8, seed in any::<u64>()) {
            let m = random(d, seed);
            let back = devectorize(&vectorize(&m).unwrap(), d).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn trace_norm_triangle(seed in any::<u64>()) {
            let a = random(3, seed);
            let b = random(3, seed.wrapping_add(1));
            let lhs = trace_norm(&(&a + &b)).unwrap();
            let rhs = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
