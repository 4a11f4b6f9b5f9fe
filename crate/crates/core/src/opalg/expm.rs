//! Matrix exponential.
//!
//! General matrices go through scaling and squaring with a diagonal Padé
//! approximant (degrees 3, 5, 7, 9 or 13, chosen from the 1-norm). Matrices
//! that are normal to within the requested tolerance are exponentiated through
//! their Schur form instead, which is then diagonal.

use nalgebra::Schur;

use super::{CMatrix, C64};
use crate::error::{Error, Result};

// Backward-error thresholds for double precision.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a square complex matrix.
///
/// `tol` is the relative commutator size `‖MM†−M†M‖ / ‖M‖²` below which `m` is
/// treated as normal and exponentiated spectrally; everything else uses Padé.
pub fn expm(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    check_input(m)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("expm tolerance {tol}")));
    }
    if is_normal(m, tol) {
        if let Some(e) = expm_normal(m) {
            return finite(e);
        }
    }
    finite(expm_pade(m))
}

fn check_input(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expm of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("expm input"));
    }
    Ok(())
}

fn finite(m: CMatrix) -> Result<CMatrix> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Err(Error::NonFinite("expm output"))
    } else {
        Ok(m)
    }
}

pub(crate) fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn is_normal(m: &CMatrix, tol: f64) -> bool {
    let scale = one_norm(m);
    if scale == 0.0 {
        return true;
    }
    let adj = m.adjoint();
    let comm = m * &adj - &adj * m;
    one_norm(&comm) <= tol * scale * scale
}

/// Spectral route for normal matrices: `M = Q T Q†` with `T` diagonal.
fn expm_normal(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)?;
    let (q, t) = schur.unpack();
    let mut scaled = q.clone();
    for j in 0..n {
        let e = t[(j, j)].exp();
        for i in 0..n {
            scaled[(i, j)] *= e;
        }
    }
    Some(scaled * q.adjoint())
}

/// Padé scaling-and-squaring exponential (no input validation).
pub(crate) fn expm_pade(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    // Remove the imaginary part of the mean diagonal when that shrinks the
    // norm. A real shift could push eigenvalues to large positive real parts
    // and overflow during squaring, so it is not used.
    let mu = C64::new(0.0, (m.trace() / C64::from(n as f64)).im);
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= mu;
    }
    let (a, shift) = if mu.im != 0.0 && one_norm(&a) < one_norm(m) {
        (a, mu)
    } else {
        (m.clone(), C64::new(0.0, 0.0))
    };

    let norm = one_norm(&a);
    let ident = CMatrix::identity(n, n);
    let mut result = if norm <= THETA_9 {
        let coeffs: &[f64] = if norm <= THETA_3 {
            &B3
        } else if norm <= THETA_5 {
            &B5
        } else if norm <= THETA_7 {
            &B7
        } else {
            &B9
        };
        low_degree(&a, coeffs, &ident)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let a = a.scale(0.5f64.powi(s));
        let mut r = degree13(&a, &ident);
        for _ in 0..s {
            r = &r * &r;
        }
        r
    };
    if shift != C64::new(0.0, 0.0) {
        result *= shift.exp();
    }
    result
}

fn solve_pade(u: CMatrix, v: CMatrix) -> CMatrix {
    let num = &v + &u;
    let den = v - u;
    den.lu().solve(&num).expect("Padé denominator is nonsingular")
}

fn low_degree(a: &CMatrix, b: &[f64], ident: &CMatrix) -> CMatrix {
    let a2 = a * a;
    let m = b.len() - 1;
    // powers of A² up to (m-1)/2
    let mut pows = vec![ident.clone()];
    for k in 1..=m / 2 {
        let next = &pows[k - 1] * &a2;
        pows.push(next);
    }
    let mut u = CMatrix::zeros(a.nrows(), a.ncols());
    let mut v = CMatrix::zeros(a.nrows(), a.ncols());
    for (k, pow) in pows.iter().enumerate() {
        v += pow.scale(b[2 * k]);
        if 2 * k < m {
            u += pow.scale(b[2 * k + 1]);
        }
    }
    let u = a * u;
    solve_pade(u, v)
}

fn degree13(a: &CMatrix, ident: &CMatrix) -> CMatrix {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]);
    let u = &a6 * inner_u
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + ident.scale(b[1]);
    let u = a * u;
    let inner_v = a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]);
    let v = &a6 * inner_v
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + ident.scale(b[0]);
    solve_pade(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_and_nilpotent() {
        let z = CMatrix::zeros(3, 3);
        assert!(max_abs(&(expm(&z, 1e-12).unwrap() - CMatrix::identity(3, 3))) < 1e-15);

        let mut n = CMatrix::zeros(2, 2);
        n[(0, 1)] = C64::new(1.0, 0.0);
        let e = expm(&n, 1e-12).unwrap();
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0, 0.0, 1.0].map(|x| C64::new(x, 0.0)),
        );
        assert!(max_abs(&(e - want)) < 1e-15);
    }

    #[test]
    fn anti_hermitian_matches_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let r = random(4, &mut rng);
            let h = (&r + r.adjoint()).scale(0.5);
            let a = h.map(|z| z * C64::new(0.0, -1.0)); // A = -iH
            // oracle: diagonalize H, exponentiate eigenvalues
            let eig = SymmetricEigen::new(h.clone());
            let v = &eig.eigenvectors;
            let d = CMatrix::from_diagonal(
                &eig.eigenvalues.map(|l| C64::new(0.0, -l).exp()),
            );
            let oracle = v * d * v.adjoint();
            for e in [expm(&a, 1e-12).unwrap(), expm_pade(&a)] {
                assert!(max_abs(&(&e - &oracle)) < 1e-10);
                let unit = &e * e.adjoint() - CMatrix::identity(4, 4);
                assert!(max_abs(&unit) < 1e-10);
            }
        }
    }

    #[test]
    fn strongly_damped_mode_does_not_overflow() {
        // eigenvalues 0 and -1e4; a real diagonal shift would create e^{+5000}
        let m = CMatrix::from_row_slice(2, 2, &[-1e4, 1.0, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
        let e = expm(&m, 1e-12).unwrap();
        let want = [(-1e4f64).exp(), (1.0 - (-1e4f64).exp()) / 1e4, 0.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            let got = e[(k / 2, k % 2)];
            assert!((got - C64::new(*w, 0.0)).norm() < 1e-13, "{got} vs {w}");
        }
    }

    #[test]
    fn large_norm_uses_squaring() {
        // diagonalizable non-normal matrix with known exponential: S D S^-1
        let s = CMatrix::from_row_slice(
            2,
            2,
            &[1.0, 2.0, 0.0, 1.0].map(|x| C64::new(x, 0.0)),
        );
        let s_inv = s.clone().try_inverse().unwrap();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(-30.0, 5.0),
            C64::new(3.0, -1.0),
        ]));
        let m = &s * &d * &s_inv;
        let want = &s * CMatrix::from_diagonal(&d.diagonal().map(|z| z.exp())) * &s_inv;
        let got = expm(&m, 1e-12).unwrap();
        let rel = max_abs(&(&got - &want)) / max_abs(&want);
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(expm(&m, 1e-12), Err(Error::NonFinite(_))));
        assert!(expm(&CMatrix::zeros(2, 3), 1e-12).is_err());
    }

    #[test]
    fn commuting_sum_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = random(3, &mut rng);
            let b = &a * &a - a.scale(0.5); // polynomial in A commutes with A
            let lhs = expm(&(&a + &b), 1e-12).unwrap();
            let rhs = expm(&a, 1e-12).unwrap() * expm(&b, 1e-12).unwrap();
            assert!(max_abs(&(&lhs - &rhs)) / max_abs(&lhs).max(1.0) < 1e-10);
        }
    }
}
