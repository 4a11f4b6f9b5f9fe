use super::grid::{GaussianApparatus, MomentumGrid};
use super::joint::{
    deviation_measure, evolve_joint_from, ideal_dam_state, ideal_pm_state, phase, sector_propagate,
    DeviationNorm,
};
use crate::error::{Error, Result};
use crate::liouville::{gad_liouvillian, GadParams};
use crate::opalg::{steady_state, trace_norm_hermitian, CMatrix, Superoperator, DEFAULT_ZERO_TOL};
use crate::qubit;

/// Local maxima of the 3-point moving average exceeding 1% of its maximum.
pub fn count_peaks(density: &[f64]) -> usize {
    let n = density.len();
    if n < 3 {
        return 0;
    }
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            // zero padding at the ends
            (density[lo..=hi].iter().sum::<f64>()) / 3.0
        })
        .collect();
    let max = smooth.iter().copied().fold(0.0, f64::max);
    (1..n - 1)
        .filter(|&k| smooth[k] > smooth[k - 1] && smooth[k] >= smooth[k + 1] && smooth[k] > 0.01 * max)
        .count()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Bisection in `ln t` for `f(t) = target` on `[lo, hi]`, stopping once the
/// bracket is relatively narrower than `rel_tol`.
pub fn find_crossing(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    target: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)? - target;
    let fb = f(b)? - target;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "no crossing of {target} in [{lo}, {hi}]: values {} and {}",
            fa + target,
            fb + target
        )));
    }
    let sa = fa.signum();
    while (b - a) > rel_tol * a {
        let m = (a * b).sqrt();
        let fm = f(m)? - target;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a * b).sqrt())
}

/// `(T, ‖(e^{T𝓛_{p,p′}} − e^{T𝓛̃_{p,p′}})𝓟θ‖)` for each `T`, trace norm.
///
/// `𝓟θ X = tr(X) ρθ`, so the deviation reduces to the trace norm of
/// `e^{T𝓛_{p,p′}}ρθ − e^{-i(p−p′)⟨A⟩θ}ρθ`.
pub fn adiabatic_rate_check(
    l_theta: &Superoperator,
    a: &CMatrix,
    p: f64,
    pp: f64,
    t_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("T list must be positive and increasing".into()));
    }
    let rho = steady_state(l_theta, DEFAULT_ZERO_TOL)?;
    let mean = rho.expectation(a);
    t_list
        .iter()
        .map(|&t| {
            let exact = sector_propagate(l_theta, a, p, pp, t, rho.matrix())?;
            let adiabatic = rho.matrix() * phase(-(p - pp) * mean);
            let diff = exact - adiabatic;
            // the difference is not Hermitian for p ≠ p′; use singular values
            let dev = if p == pp {
                trace_norm_hermitian(&diff)?
            } else {
                crate::opalg::trace_norm(&diff)?
            };
            Ok((t, dev))
        })
        .collect()
}

/// The GAD pointer experiment measuring `|0⟩⟨0|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GadMeasurement {
    pub theta: f64,
    pub apparatus: GaussianApparatus,
    pub grid: MomentumGrid,
    pub norm: DeviationNorm,
}

impl GadMeasurement {
    pub fn new(theta: f64, sigma: f64) -> Result<Self> {
        GadParams::new(theta, 1.0)?;
        let apparatus = GaussianApparatus::new(sigma)?;
        Ok(Self {
            theta,
            grid: MomentumGrid::for_apparatus(&apparatus),
            apparatus,
            norm: DeviationNorm::default(),
        })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        self.grid = MomentumGrid::uniform(nodes, MomentumGrid::DEFAULT_RANGE * self.apparatus.sigma_p())?;
        Ok(self)
    }

    pub fn with_norm(mut self, norm: DeviationNorm) -> Self {
        self.norm = norm;
        self
    }

    fn evolved(&self, gamma: f64, t: f64) -> Result<super::JointState> {
        let params = GadParams::new(self.theta, gamma)?;
        evolve_joint_from(
            &gad_liouvillian(&params),
            &qubit::projector(0),
            &self.apparatus,
            t,
            &self.grid,
            &params.steady_state(),
        )
    }

    /// Distance of the coupled state from the ideal projective limit.
    pub fn pm_deviation(&self, gamma: f64, t: f64) -> Result<f64> {
        let rho = GadParams::new(self.theta, gamma)?.steady_state();
        let ideal = ideal_pm_state(&rho, &qubit::projector(0), &self.apparatus, &self.grid)?;
        deviation_measure(&self.evolved(gamma, t)?, &ideal, self.norm)
    }

    /// Distance of the coupled state from the ideal adiabatic limit.
    pub fn dam_deviation(&self, gamma: f64, t: f64) -> Result<f64> {
        let rho = GadParams::new(self.theta, gamma)?.steady_state();
        let ideal = ideal_dam_state(&rho, self.theta, &self.apparatus, &self.grid);
        deviation_measure(&self.evolved(gamma, t)?, &ideal, self.norm)
    }

    /// Both deviations at one coupling time.
    pub fn deviations(&self, gamma: f64, t: f64) -> Result<(f64, f64)> {
        let params = GadParams::new(self.theta, gamma)?;
        let rho = params.steady_state();
        let a = qubit::projector(0);
        let evolved = self.evolved(gamma, t)?;
        let pm = ideal_pm_state(&rho, &a, &self.apparatus, &self.grid)?;
        let dam = ideal_dam_state(&rho, self.theta, &self.apparatus, &self.grid);
        Ok((
            deviation_measure(&evolved, &pm, self.norm)?,
            deviation_measure(&evolved, &dam, self.norm)?,
        ))
    }

    /// Largest `1/T` (MHz) at which the projective deviation is still below
    /// `tol`.
    pub fn pm_crossing(&self, gamma: f64, tol: f64) -> Result<f64> {
        let t = find_crossing(|t| self.pm_deviation(gamma, t), 1e-4 / gamma, 1.0 / gamma, tol, 1e-3)?;
        Ok(1.0 / t)
    }

    /// Smallest `T` (μs) at which the adiabatic deviation drops below `tol`.
    pub fn dam_crossing(&self, gamma: f64, tol: f64) -> Result<f64> {
        find_crossing(|t| self.dam_deviation(gamma, t), 10.0 / gamma, 1e4 / gamma, tol, 1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_counting() {
        let x: Vec<f64> = (0..401).map(|k| -1.0 + k as f64 * 0.0075).collect();
        let g = |c: f64, s: f64| x.iter().map(move |&v| (-(v - c) * (v - c) / (2.0 * s * s)).exp());
        let two: Vec<f64> = g(0.0, 0.1).zip(g(1.0, 0.1)).map(|(a, b)| a + b).collect();
        assert_eq!(count_peaks(&two), 2);
        let one: Vec<f64> = g(0.5, 0.3).collect();
        assert_eq!(count_peaks(&one), 1);
        // a 0.5% bump does not count
        let small: Vec<f64> = g(0.0, 0.1).zip(g(1.0, 0.1)).map(|(a, b)| a + 0.005 * b).collect();
        assert_eq!(count_peaks(&small), 1);
        assert_eq!(count_peaks(&[1.0, 2.0]), 0);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 10.0].iter().map(|&t| (t, 3.0 / t)).collect();
        assert!((log_log_slope(&pts) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_of_known_function() {
        let t = find_crossing(|t| Ok(1.0 / t), 0.01, 100.0, 0.25, 1e-6).unwrap();
        assert!((t - 4.0).abs() < 4e-6);
        assert!(find_crossing(Ok, 1.0, 2.0, 5.0, 1e-3).is_err());
    }

    #[test]
    fn adiabatic_deviation_decays_like_inverse_t() {
        let g = 5.0;
        let l = gad_liouvillian(&GadParams::new(0.5, g).unwrap());
        let a = qubit::projector(0);
        let ts: Vec<f64> = (0..9).map(|k| 10f64.powf(1.0 + 2.0 * k as f64 / 8.0) / g).collect();
        let pts = adiabatic_rate_check(&l, &a, 1.0, 0.0, &ts).unwrap();
        let slope = log_log_slope(&pts);
        assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
        let at400 = adiabatic_rate_check(&l, &a, 1.0, 0.0, &[400.0 / g]).unwrap()[0].1;
        assert!(at400 <= 0.01, "{at400}");
        // diagonal sectors keep ρθ
        let diag = adiabatic_rate_check(&l, &a, 0.7, 0.7, &[1.0, 10.0]).unwrap();
        assert!(diag.iter().all(|(_, d)| *d < 1e-12));
    }
}
