use rayon::prelude::*;

use super::grid::{GaussianApparatus, MomentumGrid};
use crate::error::{Error, Result};
use crate::opalg::{
    check_finite, check_hermitian, devectorize, expm, hs_norm, trace_norm_hermitian, unitary_exp,
    vectorize, CMatrix, DensityMatrix, Superoperator, C64, EXPM_TOL, I,
};

/// System ⊗ pointer state resolved on a momentum grid.
///
/// Block `(i, j)` is the `d × d` system operator multiplying `|pᵢ⟩⟨pⱼ|`, with
/// the amplitudes `φ(pᵢ)φ*(pⱼ)` included but not the quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    grid: MomentumGrid,
    dim: usize,
    matrix: CMatrix,
}

impl JointState {
    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All blocks as one `(n d) × (n d)` matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let d = self.dim;
        self.matrix.view((i * d, j * d), (d, d)).into_owned()
    }

    /// `Σᵢ wᵢ tr(block(i, i))`.
    pub fn total_trace(&self) -> f64 {
        let d = self.dim;
        self.grid
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| w * (0..d).map(|k| self.matrix[(i * d + k, i * d + k)].re).sum::<f64>())
            .sum()
    }

    /// `Σᵢ wᵢ block(i, i)`: the reduced system state.
    pub fn system_marginal(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for (i, w) in self.grid.weights().iter().enumerate() {
            out += self.block(i, i).scale(*w);
        }
        out
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::opalg::hermiticity_defect(&self.matrix)
    }

    /// Blocks `(i, j)` multiplied by `√(wᵢwⱼ)`; its norms approximate the
    /// continuum operator norms.
    fn weighted(&self) -> CMatrix {
        let d = self.dim;
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        CMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |r, c| {
            self.matrix[(r, c)] * (sw[r / d] * sw[c / d])
        })
    }
}

fn build(grid: &MomentumGrid, dim: usize, block: impl Fn(usize, usize) -> CMatrix + Sync) -> JointState {
    let n = grid.len();
    // upper triangle in parallel, mirrored to keep the state exactly Hermitian
    let rows: Vec<Vec<CMatrix>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| block(i, j)).collect())
        .collect();
    let mut matrix = CMatrix::zeros(n * dim, n * dim);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, b) in row.into_iter().enumerate() {
            let j = i + k;
            matrix.view_mut((i * dim, j * dim), (dim, dim)).copy_from(&b);
            if j != i {
                matrix.view_mut((j * dim, i * dim), (dim, dim)).copy_from(&b.adjoint());
            }
        }
    }
    JointState {
        grid: grid.clone(),
        dim,
        matrix,
    }
}

fn validate(l_theta: &Superoperator, a: &CMatrix) -> Result<()> {
    check_finite(a, "observable")?;
    check_hermitian(a, 1e-12)?;
    if a.nrows() != l_theta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, generator acts on dimension {}",
            a.nrows(),
            a.ncols(),
            l_theta.dim()
        )));
    }
    Ok(())
}

/// `(p 𝒜 − p′ 𝒜ᵣ)` with `𝒜 X = AX`, `𝒜ᵣ X = XA`.
fn coupling(a: &CMatrix, p: f64, pp: f64) -> CMatrix {
    Superoperator::left(a).matrix().scale(p) - Superoperator::right(a).matrix().scale(pp)
}

/// `𝓛_{p,p′} = 𝓛θ − iT⁻¹(p A· − p′ ·A)`.
pub fn sector_liouvillian(
    l_theta: &Superoperator,
    a: &CMatrix,
    p: f64,
    pp: f64,
    t: f64,
) -> Result<Superoperator> {
    validate(l_theta, a)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling time T = {t} must be positive")));
    }
    Superoperator::new(l_theta.dim(), l_theta.matrix() - coupling(a, p, pp) * (I / t))
}

/// `T 𝓛_{p,p′}`, which stays finite as `T → 0`.
pub(crate) fn sector_exponent(l_theta: &Superoperator, a: &CMatrix, p: f64, pp: f64, t: f64) -> CMatrix {
    l_theta.matrix().scale(t) - coupling(a, p, pp) * I
}

/// `e^{T 𝓛_{p,p′}}` applied to `rho`; at `T = 0` this is the impulsive limit.
pub fn sector_propagate(
    l_theta: &Superoperator,
    a: &CMatrix,
    p: f64,
    pp: f64,
    t: f64,
    rho: &CMatrix,
) -> Result<CMatrix> {
    let e = expm(&sector_exponent(l_theta, a, p, pp, t), EXPM_TOL)?;
    devectorize(&(e * vectorize(rho)?), rho.nrows())
}

/// Couples the steady state of `l_theta` to the pointer for a time `T`.
///
/// `T = 0` is read as the impulsive limit of the `1/T` coupling, which is the
/// ideal projective measurement.
pub fn evolve_joint(
    l_theta: &Superoperator,
    a: &CMatrix,
    app: &GaussianApparatus,
    t: f64,
    grid: &MomentumGrid,
) -> Result<JointState> {
    let rho = crate::opalg::steady_state(l_theta, crate::opalg::DEFAULT_ZERO_TOL)?;
    evolve_joint_from(l_theta, a, app, t, grid, &rho)
}

/// As [`evolve_joint`] with the system state supplied.
pub fn evolve_joint_from(
    l_theta: &Superoperator,
    a: &CMatrix,
    app: &GaussianApparatus,
    t: f64,
    grid: &MomentumGrid,
    rho: &DensityMatrix,
) -> Result<JointState> {
    validate(l_theta, a)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling time T = {t}")));
    }
    grid.check_resolves(app)?;
    let p = grid.nodes();
    let phi: Vec<f64> = p.iter().map(|&x| app.amplitude(x)).collect();
    let rho = rho.matrix();
    let failed = std::sync::Mutex::new(None);
    let state = build(grid, l_theta.dim(), |i, j| {
        match sector_propagate(l_theta, a, p[i], p[j], t, rho) {
            Ok(b) => b.scale(phi[i] * phi[j]),
            Err(e) => {
                failed.lock().unwrap().get_or_insert(e);
                CMatrix::zeros(rho.nrows(), rho.nrows())
            }
        }
    });
    match failed.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(state),
    }
}

/// Ideal projective limit: blocks `φᵢφⱼ e^{-ipᵢA} ρ e^{ipⱼA}`.
pub fn ideal_pm_state(
    rho: &DensityMatrix,
    a: &CMatrix,
    app: &GaussianApparatus,
    grid: &MomentumGrid,
) -> Result<JointState> {
    check_hermitian(a, 1e-12)?;
    if a.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch("observable and state differ in dimension".into()));
    }
    let p = grid.nodes();
    let phi: Vec<f64> = p.iter().map(|&x| app.amplitude(x)).collect();
    let left: Vec<CMatrix> = p.iter().map(|&x| unitary_exp(a, x) * rho.matrix()).collect();
    let right: Vec<CMatrix> = p.iter().map(|&x| unitary_exp(a, x).adjoint()).collect();
    Ok(build(grid, rho.dim(), |i, j| (&left[i] * &right[j]).scale(phi[i] * phi[j])))
}

/// Ideal adiabatic limit: blocks `φᵢφⱼ e^{-i(pᵢ−pⱼ)⟨A⟩} ρ`.
pub fn ideal_dam_state(
    rho: &DensityMatrix,
    mean_a: f64,
    app: &GaussianApparatus,
    grid: &MomentumGrid,
) -> JointState {
    let p = grid.nodes();
    let phi: Vec<f64> = p.iter().map(|&x| app.amplitude(x)).collect();
    build(grid, rho.dim(), |i, j| {
        rho.matrix() * ((-I * ((p[i] - p[j]) * mean_a)).exp() * (phi[i] * phi[j]))
    })
}

/// Norm used to compare joint states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviationNorm {
    /// Frobenius norm of the weighted block difference.
    #[default]
    HilbertSchmidt,
    /// Sum of absolute eigenvalues of the weighted block difference.
    Trace,
}

impl std::str::FromStr for DeviationNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hs" | "hilbert-schmidt" => Ok(Self::HilbertSchmidt),
            "trace" => Ok(Self::Trace),
            other => Err(Error::InvalidParameter(format!("unknown norm {other:?}"))),
        }
    }
}

impl DeviationNorm {
    pub fn of_hermitian(self, m: &CMatrix) -> Result<f64> {
        match self {
            Self::HilbertSchmidt => Ok(hs_norm(m)),
            Self::Trace => trace_norm_hermitian(m),
        }
    }
}

/// `‖s1 − s2‖` with blocks weighted by `√(wᵢwⱼ)`.
pub fn deviation_measure(s1: &JointState, s2: &JointState, norm: DeviationNorm) -> Result<f64> {
    if s1.grid != s2.grid || s1.dim != s2.dim {
        return Err(Error::GridMismatch);
    }
    norm.of_hermitian(&(s1.weighted() - s2.weighted()))
}

pub(crate) fn phase(x: f64) -> C64 {
    (I * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{gad_liouvillian, GadParams};
    use crate::opalg::max_abs;
    use crate::qubit;

    fn setup(sigma: f64, nodes: usize) -> (GaussianApparatus, MomentumGrid) {
        let app = GaussianApparatus::new(sigma).unwrap();
        let grid = MomentumGrid::uniform(nodes, 8.0 * app.sigma_p()).unwrap();
        (app, grid)
    }

    #[test]
    fn sector_edge_cases() {
        let l = gad_liouvillian(&GadParams::new(0.4, 5.0).unwrap());
        let a = qubit::projector(0);
        let s = sector_liouvillian(&l, &a, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(s.matrix(), l.matrix());
        assert!(sector_liouvillian(&l, &a, 1.0, 1.0, 0.0).is_err());
        for p in [0.3, -2.0, 7.0] {
            let s = sector_liouvillian(&l, &a, p, p, 0.7).unwrap();
            assert!(s.generator_trace_defect() < 1e-14);
        }
        assert!(sector_liouvillian(&l, &qubit::sigma_minus(), 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn swapped_sectors_are_adjoint() {
        let l = gad_liouvillian(&GadParams::new(0.3, 5.0).unwrap());
        let a = qubit::sigma_x();
        let rho = GadParams::new(0.3, 5.0).unwrap().steady_state();
        let x = sector_propagate(&l, &a, 1.3, -0.4, 0.8, rho.matrix()).unwrap();
        let y = sector_propagate(&l, &a, -0.4, 1.3, 0.8, rho.matrix()).unwrap();
        assert!(max_abs(&(x.adjoint() - y)) < 1e-13);
    }

    #[test]
    fn dual_sector_matches_explicit_formula() {
        // 𝓛*_{p,p′} X = 𝓛θ* X + iT⁻¹(pAX − p′XA)
        let (th, g, t, p, pp) = (0.3, 5.0, 0.7, 1.2, -0.5);
        let l = gad_liouvillian(&GadParams::new(th, g).unwrap());
        let a = qubit::projector(0);
        let dual = sector_liouvillian(&l, &a, p, pp, t).unwrap().dual();
        let id = CMatrix::identity(2, 2);
        let got = dual.apply(&id).unwrap();
        // 𝓛θ* I = 0 for a trace-preserving generator
        let want = (&a * &id).scale(p) - (&id * &a).scale(pp);
        let want = want * (I / t);
        assert!(max_abs(&(got - want)) < 1e-12);
    }

    #[test]
    fn zero_time_is_projective_limit() {
        let (app, grid) = setup(0.2, 65);
        let params = GadParams::new(0.5, 5.0).unwrap();
        let l = gad_liouvillian(&params);
        let a = qubit::projector(0);
        let evolved = evolve_joint(&l, &a, &app, 0.0, &grid).unwrap();
        let pm = ideal_pm_state(&params.steady_state(), &a, &app, &grid).unwrap();
        assert!(max_abs(&(evolved.matrix() - pm.matrix())) < 1e-12);
    }

    #[test]
    fn trivial_observables() {
        let (app, grid) = setup(0.3, 33);
        let rho = GadParams::new(0.3, 1.0).unwrap().steady_state();
        let zero = ideal_pm_state(&rho, &CMatrix::zeros(2, 2), &app, &grid).unwrap();
        let product = ideal_dam_state(&rho, 0.0, &app, &grid);
        assert!(max_abs(&(zero.matrix() - product.matrix())) < 1e-14);

        let id = ideal_pm_state(&rho, &CMatrix::identity(2, 2), &app, &grid).unwrap();
        let p = grid.nodes();
        let b = id.block(3, 10);
        let want = rho.matrix() * (phase(-(p[3] - p[10])) * (app.amplitude(p[3]) * app.amplitude(p[10])));
        assert!(max_abs(&(b - want)) < 1e-14);
        assert!(max_abs(&(id.system_marginal() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn joint_state_invariants() {
        let (app, grid) = setup(0.2, 65);
        let l = gad_liouvillian(&GadParams::new(0.3, 5.0).unwrap());
        let a = qubit::projector(0);
        for t in [0.0, 0.01, 0.5, 20.0] {
            let s = evolve_joint(&l, &a, &app, t, &grid).unwrap();
            assert!((s.total_trace() - 1.0).abs() < 1e-8);
            assert_eq!(s.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn dam_marginal_is_steady_state() {
        let (app, grid) = setup(0.2, 129);
        let params = GadParams::new(0.5, 5.0).unwrap();
        let l = gad_liouvillian(&params);
        let a = qubit::projector(0);
        for t in [1.0, 10.0, 50.0] {
            let s = evolve_joint(&l, &a, &app, t, &grid).unwrap();
            let dev = max_abs(&(s.system_marginal() - params.steady_state().matrix()));
            assert!(dev < 1e-6, "T = {t}: {dev}");
        }
        let ideal = ideal_dam_state(&params.steady_state(), 0.5, &app, &grid);
        assert!(max_abs(&(ideal.system_marginal() - params.steady_state().matrix())) < 1e-8);
    }

    #[test]
    fn deviation_basics() {
        let (app, grid) = setup(0.2, 33);
        let rho = GadParams::new(0.5, 1.0).unwrap().steady_state();
        let s = ideal_dam_state(&rho, 0.5, &app, &grid);
        assert_eq!(deviation_measure(&s, &s, DeviationNorm::Trace).unwrap(), 0.0);
        let (app2, grid2) = setup(0.2, 35);
        let other = ideal_dam_state(&rho, 0.5, &app2, &grid2);
        assert!(matches!(
            deviation_measure(&s, &other, DeviationNorm::HilbertSchmidt),
            Err(Error::GridMismatch)
        ));
        // weighted norms approximate the continuum: a pure product state has
        // unit trace norm and unit HS norm
        let prod = ideal_dam_state(&DensityMatrix::diagonal(&[1.0, 0.0]).unwrap(), 0.0, &app, &grid);
        let zero = JointState { matrix: CMatrix::zeros(66, 66), ..prod.clone() };
        for norm in [DeviationNorm::Trace, DeviationNorm::HilbertSchmidt] {
            assert!((deviation_measure(&prod, &zero, norm).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
