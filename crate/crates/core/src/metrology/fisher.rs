use log::debug;

use super::povm::povm_analytic_gad;
use super::Scheme;
use crate::error::{Error, Result};
use crate::liouville::GadParams;
use crate::pointer::{gaussian, GaussianApparatus, PointerDistribution, XGrid};

/// Step used for distribution families.
pub const DISTRIBUTION_STEP: f64 = 1e-4;

/// `F(θ) = ∫ (∂θp)²/p dx` with a central difference for `∂θp`; nodes where
/// `p ≤ 1e-12 max p` are skipped.
pub fn cfi(family: impl Fn(f64) -> Result<PointerDistribution>, theta: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h}")));
    }
    let p = family(theta)?;
    let plus = family(theta + h)?;
    let minus = family(theta - h)?;
    if plus.grid() != p.grid() || minus.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let drift = (plus.normalization() - minus.normalization()).abs();
    if drift > 1e-4 {
        return Err(Error::Normalization(drift));
    }
    let max = p.density().iter().copied().fold(0.0, f64::max);
    let integrand: Vec<f64> = p
        .density()
        .iter()
        .zip(plus.density().iter().zip(minus.density()))
        .map(|(&q, (&a, &b))| {
            if q > 1e-12 * max {
                let dq = (a - b) / (2.0 * h);
                dq * dq / q
            } else {
                0.0
            }
        })
        .collect();
    Ok(p.grid().integrate(&integrand).max(0.0))
}

/// Reading grid covering both eigenvalues of `|0⟩⟨0|` and the mean `θ`.
pub fn default_x_grid(theta: f64, sigma: f64) -> Result<XGrid> {
    XGrid::covering(&[0.0, 1.0, theta], sigma)
}

/// Reading density of the GAD measurement of `|0⟩⟨0|` under a scheme.
pub fn scheme_density(scheme: Scheme, theta: f64, sigma: f64, x_grid: &XGrid) -> Result<PointerDistribution> {
    let params = GadParams::new(theta, 1.0)?;
    GaussianApparatus::new(sigma)?;
    match scheme {
        Scheme::PmIdeal => PointerDistribution::from_fn(x_grid.clone(), |x| {
            theta * gaussian(x - 1.0, sigma) + (1.0 - theta) * gaussian(x, sigma)
        }),
        Scheme::DamIdeal => PointerDistribution::from_fn(x_grid.clone(), |x| gaussian(x - theta, sigma)),
        Scheme::FiniteT { gamma, t } => {
            povm_analytic_gad(theta, gamma, t, sigma, x_grid)?.distribution(&params.steady_state())
        }
    }
}

/// Fisher information against the quantum bound for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    pub scheme: Scheme,
    pub theta: f64,
    pub sigma: f64,
    pub n: usize,
    pub cfi: f64,
    pub qfi: f64,
    pub ccrb: f64,
    pub qcrb: f64,
    pub violated: bool,
}

impl FisherReport {
    pub fn new(scheme: Scheme, theta: f64, sigma: f64, n: usize, cfi: f64, qfi: f64) -> Self {
        let ccrb = 1.0 / (n as f64 * cfi);
        let qcrb = 1.0 / (n as f64 * qfi);
        Self {
            scheme,
            theta,
            sigma,
            n,
            cfi,
            qfi,
            ccrb,
            qcrb,
            violated: ccrb < qcrb,
        }
    }
}

/// `H(θ) = 1/(θ(1−θ))` for the GAD steady states.
pub fn gad_qfi(theta: f64) -> f64 {
    1.0 / (theta * (1.0 - theta))
}

pub fn fisher_report(scheme: Scheme, theta: f64, sigma: f64, n: usize) -> Result<FisherReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let grid = default_x_grid(theta, sigma)?;
    let f = cfi(|th| scheme_density(scheme, th, sigma, &grid), theta, DISTRIBUTION_STEP)?;
    debug!("{scheme:?} θ={theta} σ={sigma}: F = {f}");
    Ok(FisherReport::new(scheme, theta, sigma, n, f, gad_qfi(theta)))
}

/// Rows for the ideal projective and adiabatic schemes at every `σ`, followed
/// by finite-`T` rows at every `(σ, T)`.
pub fn qcrb_violation_report(
    theta: f64,
    sigma_list: &[f64],
    t_list: &[f64],
    gamma: f64,
    n: usize,
) -> Result<Vec<FisherReport>> {
    let mut rows = Vec::new();
    for &sigma in sigma_list {
        rows.push(fisher_report(Scheme::DamIdeal, theta, sigma, n)?);
        rows.push(fisher_report(Scheme::PmIdeal, theta, sigma, n)?);
        for &t in t_list {
            rows.push(fisher_report(Scheme::FiniteT { gamma, t }, theta, sigma, n)?);
        }
    }
    Ok(rows)
}
