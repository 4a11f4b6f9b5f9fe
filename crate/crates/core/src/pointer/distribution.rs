use std::f64::consts::PI;

use super::grid::XGrid;
use super::joint::JointState;
use crate::error::{Error, Result};
use crate::opalg::{CMatrix, C64};

/// Tabulated density of pointer readings.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerDistribution {
    grid: XGrid,
    density: Vec<f64>,
}

impl PointerDistribution {
    pub const CLIP_TOL: f64 = 1e-10;
    pub const NORMALIZATION_TOL: f64 = 1e-4;

    /// Clips values in `[-1e-10, 0)` to zero and checks `∫p dx = 1 ± 1e-4`.
    pub fn new(grid: XGrid, mut density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} density values on a {}-node grid",
                density.len(),
                grid.len()
            )));
        }
        for v in density.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite("pointer density"));
            }
            if *v < -Self::CLIP_TOL {
                return Err(Error::NegativeDensity(*v));
            }
            *v = v.max(0.0);
        }
        let mass = grid.integrate(&density);
        if (mass - 1.0).abs() > Self::NORMALIZATION_TOL {
            return Err(Error::Normalization(mass));
        }
        Ok(Self { grid, density })
    }

    /// Tabulates a closed-form density.
    pub fn from_fn(grid: XGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, density)
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn normalization(&self) -> f64 {
        self.grid.integrate(&self.density)
    }

    pub fn mean(&self) -> f64 {
        let xp: Vec<f64> = self.x().iter().zip(&self.density).map(|(x, p)| x * p).collect();
        self.grid.integrate(&xp) / self.normalization()
    }

    /// `max_k |p(x_k) − q(x_k)|`; the grids must coincide.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn sup_distance_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x()
            .iter()
            .zip(&self.density)
            .map(|(&x, p)| (p - f(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// `p(x) = (1/2π) Σᵢⱼ wᵢwⱼ e^{i(pᵢ−pⱼ)x} tr(block(i, j))`.
pub fn pointer_distribution(state: &JointState, x_grid: &XGrid) -> Result<PointerDistribution> {
    let grid = state.grid();
    let (n, d) = (grid.len(), state.dim());
    let p = grid.nodes();
    let w = grid.weights();
    let m = state.matrix();
    let traces = CMatrix::from_fn(n, n, |i, j| {
        let t: C64 = (0..d).map(|k| m[(i * d + k, j * d + k)]).sum();
        t * (w[i] * w[j])
    });
    // column k holds e^{-i pⱼ x_k}
    let waves = CMatrix::from_fn(n, x_grid.len(), |j, k| super::joint::phase(-p[j] * x_grid.nodes()[k]));
    let tw = &traces * &waves;
    let density = (0..x_grid.len())
        .map(|k| {
            let s: C64 = (0..n).map(|i| waves[(i, k)].conj() * tw[(i, k)]).sum();
            s.re / (2.0 * PI)
        })
        .collect();
    PointerDistribution::new(x_grid.clone(), density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::GadParams;
    use crate::pointer::grid::{gaussian, GaussianApparatus, MomentumGrid};
    use crate::pointer::joint::{ideal_dam_state, ideal_pm_state};
    use crate::qubit;

    #[test]
    fn rejects_bad_densities() {
        let g = XGrid::uniform(0.0, 1.0, 11).unwrap();
        assert!(matches!(PointerDistribution::new(g.clone(), vec![0.5; 11]), Err(Error::Normalization(_))));
        let mut v = vec![1.0; 11];
        v[3] = -1e-3;
        assert!(matches!(PointerDistribution::new(g.clone(), v), Err(Error::NegativeDensity(_))));
        let fine = XGrid::uniform(0.0, 1.0, 10_001).unwrap();
        let mut v = vec![1.0; 10_001];
        v[0] = -1e-12;
        assert_eq!(PointerDistribution::new(fine, v).unwrap().density()[0], 0.0);
    }

    #[test]
    fn dam_state_gives_shifted_gaussian() {
        let (th, s) = (0.3, 0.2);
        let app = GaussianApparatus::new(s).unwrap();
        let grid = MomentumGrid::for_apparatus(&app);
        let rho = GadParams::new(th, 1.0).unwrap().steady_state();
        let state = ideal_dam_state(&rho, th, &app, &grid);
        let x = XGrid::covering(&[0.0, 1.0, th], s).unwrap();
        let dist = pointer_distribution(&state, &x).unwrap();
        assert!(dist.sup_distance_to(|x| gaussian(x - th, s)) < 1e-6);
        assert!((dist.normalization() - 1.0).abs() < 1e-6);
        assert!((dist.mean() - th).abs() < 1e-6);
    }

    #[test]
    fn pm_state_gives_two_gaussians() {
        let s = 0.1;
        let app = GaussianApparatus::new(s).unwrap();
        let grid = MomentumGrid::for_apparatus(&app);
        let rho = GadParams::new(0.5, 1.0).unwrap().steady_state();
        let state = ideal_pm_state(&rho, &qubit::projector(0), &app, &grid).unwrap();
        let x = XGrid::covering(&[0.0, 1.0], s).unwrap();
        let dist = pointer_distribution(&state, &x).unwrap();
        let want = |x: f64| 0.5 * gaussian(x - 1.0, s) + 0.5 * gaussian(x, s);
        assert!(dist.sup_distance_to(want) < 1e-6);
        // equal mass on either side of x = 1/2
        let left: Vec<f64> = dist
            .x()
            .iter()
            .zip(dist.density())
            .map(|(&x, &p)| if x < 0.5 { p } else { 0.0 })
            .collect();
        assert!((x.integrate(&left) - 0.5).abs() < 1e-3);
    }
}
