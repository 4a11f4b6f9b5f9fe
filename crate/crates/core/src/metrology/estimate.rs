use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fisher::{default_x_grid, scheme_density};
use super::Scheme;
use crate::error::{Error, Result};
use crate::pointer::PointerDistribution;

/// Inverse-CDF sampler for a tabulated density; the CDF is interpolated
/// linearly between nodes.
#[derive(Debug, Clone)]
pub struct Sampler {
    x: Vec<f64>,
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(dist: &PointerDistribution) -> Result<Self> {
        let x = dist.x().to_vec();
        let p = dist.density();
        let mut cdf = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..x.len() {
            acc += 0.5 * (p[k - 1] + p[k]) * (x[k] - x[k - 1]);
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > PointerDistribution::NORMALIZATION_TOL {
            return Err(Error::Normalization(acc));
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(Self { x, cdf })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.x.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.x[k - 1] + frac * (self.x[k] - self.x[k - 1])
    }
}

/// `n` draws from `dist`, reproducible for a given seed.
pub fn sample_outcomes(dist: &PointerDistribution, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = Sampler::new(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
}

/// Monte Carlo estimates of `θ` by the sample mean of `N` readings.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationRun {
    pub scheme: Scheme,
    pub theta_true: f64,
    pub sigma: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub estimates: Vec<f64>,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    pub bias: f64,
}

impl EstimationRun {
    /// `θ(1−θ)/N`.
    pub fn qcrb(&self) -> f64 {
        self.theta_true * (1.0 - self.theta_true) / self.n as f64
    }

    /// Empirical variance below the quantum bound.
    pub fn violates_qcrb(&self) -> bool {
        self.variance < self.qcrb()
    }
}

enum Source {
    Constant(f64),
    Bernoulli(f64),
    Tabulated(Sampler),
}

impl Source {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tabulated(s) => s.sample(rng),
        }
    }
}

/// Runs `trials` independent estimates, trial `k` drawing from stream `k` of
/// the seeded generator, so the result does not depend on scheduling.
///
/// At `σ = 0` the ideal projective readings are exact Bernoulli(θ) outcomes and
/// the ideal adiabatic readings equal `θ`.
pub fn estimation_variance(
    scheme: Scheme,
    theta: f64,
    sigma: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EstimationRun> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter("N and trials must be at least 1".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
    }
    crate::liouville::GadParams::new(theta, 1.0)?;
    let source = match scheme {
        Scheme::PmIdeal if sigma == 0.0 => Source::Bernoulli(theta),
        Scheme::DamIdeal if sigma == 0.0 => Source::Constant(theta),
        Scheme::FiniteT { .. } if sigma == 0.0 => {
            return Err(Error::InvalidParameter("finite-T scheme needs sigma > 0".into()))
        }
        _ => {
            let grid = default_x_grid(theta, sigma)?;
            Source::Tabulated(Sampler::new(&scheme_density(scheme, theta, sigma, &grid)?)?)
        }
    };
    let estimates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            (0..n).map(|_| source.draw(&mut rng)).sum::<f64>() / n as f64
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let variance = if trials > 1 {
        estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    Ok(EstimationRun {
        scheme,
        theta_true: theta,
        sigma,
        n,
        trials,
        seed,
        estimates,
        variance,
        bias: mean - theta,
    })
}
