use crate::error::{Error, Result};

/// Gaussian pointer wavefunction of position spread `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianApparatus {
    sigma: f64,
}

impl GaussianApparatus {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("pointer sigma = {sigma} must be positive")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Momentum spread `σ′ = 1/(2σ)`.
    pub fn sigma_p(&self) -> f64 {
        0.5 / self.sigma
    }

    /// `φ(p) = (2πσ′²)^{-1/4} e^{-p²/(4σ′²)}`.
    pub fn amplitude(&self, p: f64) -> f64 {
        let sp = self.sigma_p();
        (2.0 * std::f64::consts::PI * sp * sp).powf(-0.25) * (-p * p / (4.0 * sp * sp)).exp()
    }

    /// Position density of the unshifted pointer, `N(0, σ²)` at `x`.
    pub fn position_density(&self, x: f64) -> f64 {
        gaussian(x, self.sigma)
    }
}

pub(crate) fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt()
}

fn trapezoid(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = (0..n).map(|k| lo + h * k as f64).collect();
    let mut weights = vec![h; n];
    weights[0] = h / 2.0;
    weights[n - 1] = h / 2.0;
    (nodes, weights)
}

/// Quadrature nodes and weights on the momentum axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    p_max: f64,
}

impl MomentumGrid {
    pub const DEFAULT_NODES: usize = 257;
    pub const DEFAULT_RANGE: f64 = 8.0;
    pub const RESOLUTION_TOL: f64 = 1e-8;

    /// 257 trapezoid nodes on `±8σ′`.
    pub fn for_apparatus(app: &GaussianApparatus) -> Self {
        Self::uniform(Self::DEFAULT_NODES, Self::DEFAULT_RANGE * app.sigma_p())
            .expect("default grid is valid")
    }

    /// Uniform trapezoid grid on `[-p_max, p_max]` with an odd node count.
    pub fn uniform(n_nodes: usize, p_max: f64) -> Result<Self> {
        if n_nodes < 3 || n_nodes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "momentum grid needs an odd node count >= 3, got {n_nodes}"
            )));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("p_max = {p_max}")));
        }
        let (nodes, weights) = trapezoid(-p_max, p_max, n_nodes);
        Ok(Self { nodes, weights, p_max })
    }

    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::DimensionMismatch("nodes and weights differ in length".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive, nodes finite".into()));
        }
        let p_max = nodes.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        Ok(Self { nodes, weights, p_max })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// `|Σ wᵢ φ(pᵢ)² − 1|`.
    pub fn resolution_defect(&self, app: &GaussianApparatus) -> f64 {
        let mass: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * app.amplitude(p).powi(2))
            .sum();
        (mass - 1.0).abs()
    }

    pub fn check_resolves(&self, app: &GaussianApparatus) -> Result<()> {
        let defect = self.resolution_defect(app);
        if defect > Self::RESOLUTION_TOL {
            Err(Error::GridUnresolved(defect))
        } else {
            Ok(())
        }
    }
}

/// Uniform trapezoid grid on the pointer-position axis.
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl XGrid {
    pub const DEFAULT_NODES: usize = 1001;
    pub const DEFAULT_MARGIN: f64 = 6.0;

    pub fn uniform(lo: f64, hi: f64, n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "x-grid [{lo}, {hi}] with {n_nodes} nodes"
            )));
        }
        let (nodes, weights) = trapezoid(lo, hi, n_nodes);
        Ok(Self { nodes, weights })
    }

    /// Covers every value in `centers` by `6σ` on both sides, 1001 nodes.
    pub fn covering(centers: &[f64], sigma: f64) -> Result<Self> {
        let lo = centers.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::uniform(
            lo - Self::DEFAULT_MARGIN * sigma,
            hi + Self::DEFAULT_MARGIN * sigma,
            Self::DEFAULT_NODES,
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn apparatus_uncertainty_product() {
        let app = GaussianApparatus::new(0.2).unwrap();
        assert_eq!(app.sigma() * app.sigma_p(), 0.5);
        assert!(GaussianApparatus::new(0.0).is_err());
    }

    #[test]
    fn default_grid_resolves_pointer() {
        for s in [0.05, 0.1, 0.2, 0.4, 1.0] {
            let app = GaussianApparatus::new(s).unwrap();
            let g = MomentumGrid::for_apparatus(&app);
            assert_eq!(g.len(), 257);
            assert!(g.nodes()[128].abs() < 1e-15);
            g.check_resolves(&app).unwrap();
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let app = GaussianApparatus::new(0.2).unwrap();
        let g = MomentumGrid::uniform(257, 2.0 * app.sigma_p()).unwrap();
        assert!(matches!(g.check_resolves(&app), Err(Error::GridUnresolved(_))));
        assert!(MomentumGrid::uniform(256, 1.0).is_err());
    }

    #[test]
    fn x_grid_covers_centers() {
        let g = XGrid::covering(&[0.0, 1.0, 0.5], 0.2).unwrap();
        assert!((g.nodes()[0] + 1.2).abs() < 1e-12);
        assert!((g.nodes()[1000] - 2.2).abs() < 1e-12);
        let ones = vec![1.0; g.len()];
        assert!((g.integrate(&ones) - 3.4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn amplitude_is_normalized(sigma in 0.02f64..2.0) {
            let app = GaussianApparatus::new(sigma).unwrap();
            prop_assert!(MomentumGrid::for_apparatus(&app).resolution_defect(&app) < 1e-10);
        }
    }
}
