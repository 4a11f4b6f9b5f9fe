use nalgebra::{Schur, SymmetricEigen};

use super::{devectorize, hermitian_part, CMatrix, CVector, DensityMatrix, Superoperator, C64};
use crate::error::{Error, Result};

/// Relative threshold (times the spectral radius) below which an eigenvalue
/// counts as a zero mode.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

const CLIP_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// Spectrum of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInfo {
    /// Sorted by decreasing real part.
    pub eigenvalues: Vec<C64>,
    /// `min |Re λ|` over the eigenvalues that are not zero modes.
    pub gap: f64,
    /// Index (into `eigenvalues`) of the eigenvalue closest to zero.
    pub steady_index: usize,
    /// Number of eigenvalues with `|λ| < zero_tol · max|λ|`.
    pub zero_modes: usize,
}

fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenSolver)?;
    let vals = schur.eigenvalues().ok_or(Error::EigenSolver)?;
    Ok(vals.iter().copied().collect())
}

/// Eigenvalues of a generator, its dissipative gap and its zero modes.
pub fn spectral_info(l: &Superoperator) -> Result<SpectralInfo> {
    spectral_info_with(l, DEFAULT_ZERO_TOL)
}

pub fn spectral_info_with(l: &Superoperator, zero_tol: f64) -> Result<SpectralInfo> {
    let mut eigenvalues = eigenvalues(l.matrix())?;
    eigenvalues.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = zero_tol * radius.max(f64::MIN_POSITIVE);
    let steady_index = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let zero_modes = eigenvalues.iter().filter(|z| z.norm() < threshold).count();
    let gap = eigenvalues
        .iter()
        .filter(|z| z.norm() >= threshold)
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralInfo {
        eigenvalues,
        gap: if gap.is_finite() { gap } else { 0.0 },
        steady_index,
        zero_modes,
    })
}

/// Unique fixed point `𝓛ρ = 0` of a trace-preserving generator.
///
/// `zero_tol` is relative to the spectral radius. Eigenvalues of the result in
/// `[-1e-12, 0)` are clipped to zero; anything more negative is an error.
pub fn steady_state(l: &Superoperator, zero_tol: f64) -> Result<DensityMatrix> {
    let info = spectral_info_with(l, zero_tol)?;
    if info.zero_modes != 1 {
        let mut re: Vec<f64> = info.eigenvalues.iter().map(|z| z.re.abs()).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Err(Error::DegenerateSteadyState {
            smallest: re.first().copied().unwrap_or(f64::NAN),
            second: re.get(1).copied().unwrap_or(f64::NAN),
        });
    }

    let d = l.dim();
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::EigenSolver)?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .ok_or(Error::EigenSolver)?;
    let null: CVector = v_t.row(k).adjoint();
    let raw = devectorize(&null, d)?;
    let tr = raw.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::EigenSolver);
    }
    let mut rho = hermitian_part(&raw.map(|z| z / tr));

    let eig = SymmetricEigen::new(rho.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -CLIP_TOL {
        return Err(Error::NegativeEigenvalue(min));
    }
    if min < 0.0 {
        let clipped = eig.eigenvalues.map(|x| C64::new(x.max(0.0), 0.0));
        let v = &eig.eigenvectors;
        rho = v * CMatrix::from_diagonal(&clipped) * v.adjoint();
        let tr = rho.trace();
        rho = hermitian_part(&rho.map(|z| z / tr));
    }

    let residual = l.apply(&rho)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = super::one_norm(l.matrix()).max(1.0);
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::SteadyStateResidual(residual));
    }
    Ok(DensityMatrix::from_unchecked(rho))
}
