use std::f64::consts::{PI, SQRT_2};

use log::{debug, warn};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::liouville::GadParams;
use crate::opalg::{
    devectorize, expm, hermitian_part, max_abs, vectorize, CMatrix, DensityMatrix, Superoperator,
    C64, EXPM_TOL,
};
use crate::pointer::{gaussian, phase, sector_exponent, GaussianApparatus, MomentumGrid, PointerDistribution, XGrid};

/// Allowed `max |Σ wₖ Πₖ − 𝟙|`.
pub const COMPLETENESS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub x: f64,
    pub matrix: CMatrix,
}

/// POVM elements tabulated on a reading grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    grid: XGrid,
    elements: Vec<PovmElement>,
}

impl Povm {
    fn new(grid: XGrid, matrices: Vec<CMatrix>) -> Self {
        let elements = grid
            .nodes()
            .iter()
            .zip(matrices)
            .map(|(&x, matrix)| PovmElement { x, matrix })
            .collect();
        Self { grid, elements }
    }

    fn checked(self) -> Result<Self> {
        let defect = self.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::Completeness(defect));
        }
        Ok(self)
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |e| e.matrix.nrows())
    }

    /// `max |Σ wₖ Πₖ − 𝟙|` entrywise.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for (e, w) in self.elements.iter().zip(self.grid.weights()) {
            sum += e.matrix.scale(*w);
        }
        max_abs(&(sum - CMatrix::identity(d, d)))
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| {
                SymmetricEigen::new(hermitian_part(&e.matrix))
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `x ↦ tr(Πₓ ρ)`.
    pub fn outcome_density(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| (&e.matrix * rho.matrix()).trace().re)
            .collect()
    }

    pub fn distribution(&self, rho: &DensityMatrix) -> Result<PointerDistribution> {
        PointerDistribution::new(self.grid.clone(), self.outcome_density(rho))
    }

    /// Largest entrywise distance between two POVMs on the same grid.
    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid || self.dim() != other.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| max_abs(&(&a.matrix - &b.matrix)))
            .fold(0.0, f64::max))
    }
}

/// `Πₓ = (1/2π) Σᵢⱼ wᵢwⱼ φᵢφⱼ e^{i(pᵢ−pⱼ)x} (e^{T𝓛*_{pᵢ,pⱼ}} 𝟙)†`.
///
/// Quadrature leaves a small anti-Hermitian part, which is removed and logged.
pub fn povm_numeric(
    l_theta: &Superoperator,
    a: &CMatrix,
    app: &GaussianApparatus,
    t: f64,
    grid: &MomentumGrid,
    x_grid: &XGrid,
) -> Result<Povm> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling time T = {t}")));
    }
    grid.check_resolves(app)?;
    let d = l_theta.dim();
    let n = grid.len();
    let p = grid.nodes();
    let amp: Vec<f64> = p.iter().zip(grid.weights()).map(|(&x, w)| w * app.amplitude(x)).collect();
    let id = vectorize(&CMatrix::identity(d, d))?;

    let rows: Vec<Result<Vec<CMatrix>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let gen = sector_exponent(l_theta, a, p[i], p[j], t).adjoint();
                    let y = devectorize(&(expm(&gen, EXPM_TOL)? * &id), d)?;
                    Ok(y.adjoint())
                })
                .collect()
        })
        .collect();
    // y(j, i) = y(i, j)†
    let mut ys = vec![CMatrix::zeros(d, d); n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, y) in row?.into_iter().enumerate() {
            let j = i + k;
            ys[j * n + i] = y.adjoint();
            ys[i * n + j] = y;
        }
    }

    let nx = x_grid.len();
    let waves = CMatrix::from_fn(n, nx, |j, k| phase(-p[j] * x_grid.nodes()[k]));
    let mut entries = vec![vec![C64::new(0.0, 0.0); nx]; d * d];
    for r in 0..d {
        for c in 0..d {
            let m = CMatrix::from_fn(n, n, |i, j| ys[i * n + j][(r, c)] * (amp[i] * amp[j]));
            let mw = &m * &waves;
            for k in 0..nx {
                let s: C64 = (0..n).map(|i| waves[(i, k)].conj() * mw[(i, k)]).sum();
                entries[r + c * d][k] = s / (2.0 * PI);
            }
        }
    }
    let mut asym: f64 = 0.0;
    let matrices = (0..nx)
        .map(|k| {
            let m = CMatrix::from_fn(d, d, |r, c| entries[r + c * d][k]);
            asym = asym.max(crate::opalg::hermiticity_defect(&m));
            hermitian_part(&m)
        })
        .collect();
    debug!("numeric POVM anti-Hermitian part removed: {asym:.3e}");
    Povm::new(x_grid.clone(), matrices).checked()
}

/// Principal square root of `T²γ² + 2iTγν(1−2θ) − ν²`.
fn big_s(tg: f64, nu: f64, theta: f64) -> C64 {
    C64::new(tg * tg - nu * nu, 2.0 * tg * nu * (1.0 - 2.0 * theta)).sqrt()
}

/// `e^{-(Tγ+iν)/2} [cosh(𝔖/2) + (Tγ ∓ iν) sinh(𝔖/2)/𝔖]` for the two diagonal
/// entries, evaluated without overflow for large `Tγ`.
pub(crate) fn dual_identity_diagonal(tg: f64, nu: f64, s: C64) -> (C64, C64) {
    let half = C64::new(tg / 2.0, 0.0);
    let ep = ((s / 2.0) - half).exp();
    let em = ((-s / 2.0) - half).exp();
    let cosh = (ep + em) / 2.0;
    let sinh_over_s = if s.norm() < 1e-4 {
        (1.0 + s * s / 24.0) / 2.0 * (-half).exp()
    } else {
        (ep - em) / 2.0 / s
    };
    let ph = phase(-nu / 2.0);
    let top = ph * (cosh + C64::new(tg, -nu) * sinh_over_s);
    let bottom = ph * (cosh + C64::new(tg, nu) * sinh_over_s);
    (top, bottom)
}

/// Closed-form POVM of the GAD pointer measurement of `|0⟩⟨0|`.
///
/// Each diagonal entry is a one-dimensional Fourier integral over `ν = p − p′`,
/// done by the trapezoid rule on `±12√2 σ′` with `nu_nodes` nodes.
pub fn povm_analytic_gad_with(theta: f64, gamma: f64, t: f64, sigma: f64, x_grid: &XGrid, nu_nodes: usize) -> Result<Povm> {
    GadParams::new(theta, gamma)?;
    let app = GaussianApparatus::new(sigma)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling time T = {t}")));
    }
    if nu_nodes < 3 {
        return Err(Error::InvalidParameter("too few quadrature nodes".into()));
    }
    let sp = app.sigma_p();
    let nu_max = 12.0 * SQRT_2 * sp;
    let h = 2.0 * nu_max / (nu_nodes - 1) as f64;
    let tg = t * gamma;
    let mut top = Vec::with_capacity(nu_nodes);
    let mut bottom = Vec::with_capacity(nu_nodes);
    let mut nus = Vec::with_capacity(nu_nodes);
    for k in 0..nu_nodes {
        let nu = -nu_max + h * k as f64;
        let w = if k == 0 || k == nu_nodes - 1 { h / 2.0 } else { h };
        let env = (-nu * nu / (8.0 * sp * sp)).exp() * w;
        let (a, b) = dual_identity_diagonal(tg, nu, big_s(tg, nu, theta));
        top.push(a * env);
        bottom.push(b * env);
        nus.push(nu);
    }
    let matrices = x_grid
        .nodes()
        .par_iter()
        .map(|&x| {
            let (mut s0, mut s1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for k in 0..nu_nodes {
                let e = phase(nus[k] * x);
                s0 += e * top[k];
                s1 += e * bottom[k];
            }
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = C64::new(s0.re / (2.0 * PI), 0.0);
            m[(1, 1)] = C64::new(s1.re / (2.0 * PI), 0.0);
            m
        })
        .collect();
    Povm::new(x_grid.clone(), matrices).checked()
}

/// Default quadrature for [`povm_analytic_gad_with`].
pub const NU_NODES: usize = 4001;

pub fn povm_analytic_gad(theta: f64, gamma: f64, t: f64, sigma: f64, x_grid: &XGrid) -> Result<Povm> {
    povm_analytic_gad_with(theta, gamma, t, sigma, x_grid, NU_NODES)
}

/// First-order expansion `Π⁽⁰⁾ + TΠ⁽¹⁾` in the coupling time.
pub fn povm_small_t(theta: f64, gamma: f64, t: f64, sigma: f64, x_grid: &XGrid) -> Result<Povm> {
    GadParams::new(theta, gamma)?;
    GaussianApparatus::new(sigma)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("coupling time T = {t}")));
    }
    if t * gamma > 0.1 {
        warn!("small-T POVM used at Tγ = {:.3}, outside its validity range", t * gamma);
    }
    let matrices = x_grid
        .nodes()
        .iter()
        .map(|&x| {
            let g1 = gaussian(x - 1.0, sigma);
            let g0 = gaussian(x, sigma);
            let box_ = (erf(x / (SQRT_2 * sigma)) - erf((x - 1.0) / (SQRT_2 * sigma))) / 2.0;
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = C64::new(g1 - t * gamma * (1.0 - theta) * (g1 - box_), 0.0);
            m[(1, 1)] = C64::new(g0 - t * gamma * theta * (g0 - box_), 0.0);
            m
        })
        .collect();
    Povm::new(x_grid.clone(), matrices).checked()
}

/// Adiabatic limit `N(x; θ, σ²) 𝟙`.
pub fn povm_adiabatic(theta: f64, sigma: f64, x_grid: &XGrid) -> Result<Povm> {
    GaussianApparatus::new(sigma)?;
    let matrices = x_grid
        .nodes()
        .iter()
        .map(|&x| CMatrix::identity(2, 2) * C64::new(gaussian(x - theta, sigma), 0.0))
        .collect();
    Povm::new(x_grid.clone(), matrices).checked()
}

/// Density of the small-T expansion in closed form.
pub fn small_t_density(theta: f64, gamma: f64, t: f64, sigma: f64, x: f64) -> f64 {
    let k = t * gamma * theta * (1.0 - theta);
    (theta - k) * gaussian(x - 1.0, sigma)
        + (1.0 - theta - k) * gaussian(x, sigma)
        + k * (erf(x / (SQRT_2 * sigma)) - erf((x - 1.0) / (SQRT_2 * sigma)))
}
