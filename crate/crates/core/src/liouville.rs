//! Liouvillian and channel builders.
//!
//! Rates are in MHz and times in μs, so `γt` is dimensionless.

use crate::error::{Error, Result};
use crate::opalg::{
    c, check_finite, check_hermitian, max_abs, CMatrix, DensityMatrix, Superoperator,
};
use crate::qubit;

/// Generalized amplitude damping: `θ ∈ (0, 1)`, `γ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadParams {
    theta: f64,
    gamma: f64,
}

impl GadParams {
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta = {theta} not in (0, 1)")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { theta, gamma })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `diag(θ, 1 − θ)`.
    pub fn steady_state(&self) -> DensityMatrix {
        DensityMatrix::diagonal(&[self.theta, 1.0 - self.theta]).expect("valid populations")
    }
}

/// `𝓛θ = γ[θ 𝓓[σ₋] + (1 − θ) 𝓓[σ₊]]`.
pub fn gad_liouvillian(p: &GadParams) -> Superoperator {
    (Superoperator::dissipator(&qubit::sigma_minus()) * p.theta
        + Superoperator::dissipator(&qubit::sigma_plus()) * (1.0 - p.theta))
        * p.gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub operator: CMatrix,
    pub rate: f64,
}

/// `-i[H, ·] + Σ rate · 𝓓[o]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: CMatrix,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<Jump>) -> Result<Self> {
        check_finite(&hamiltonian, "Hamiltonian")?;
        check_hermitian(&hamiltonian, 1e-12)?;
        let d = hamiltonian.nrows();
        for j in &jumps {
            if j.operator.nrows() != d || j.operator.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "jump operator is {}x{}, Hamiltonian is {d}x{d}",
                    j.operator.nrows(),
                    j.operator.ncols()
                )));
            }
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidParameter(format!("jump rate {}", j.rate)));
            }
            check_finite(&j.operator, "jump operator")?;
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }
}

pub fn lindblad_liouvillian(m: &LindbladModel) -> Superoperator {
    m.jumps.iter().fold(Superoperator::commutator(&m.hamiltonian), |acc, j| {
        acc + Superoperator::dissipator(&j.operator) * j.rate
    })
}

/// Hilbert–Schmidt adjoint, `tr[X† 𝓛(Y)] = tr[𝓛*(X)† Y]`.
pub fn dual(l: &Superoperator) -> Superoperator {
    l.dual()
}

/// Bloch vector `(r_x, r_y, r_z)` with `ρ = (𝟙 + r·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || r.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Bloch vector ({x}, {y}, {z}) outside the unit ball"
            )));
        }
        Ok(r)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn from_density(rho: &CMatrix) -> Result<Self> {
        if rho.nrows() != 2 || rho.ncols() != 2 {
            return Err(Error::DimensionMismatch("Bloch vector needs a qubit state".into()));
        }
        let tr = |o: CMatrix| (o * rho).trace().re;
        Self::new(tr(qubit::sigma_x()), tr(qubit::sigma_y()), tr(qubit::sigma_z()))
    }

    pub fn to_density(&self) -> CMatrix {
        (CMatrix::identity(2, 2)
            + qubit::sigma_x().scale(self.x)
            + qubit::sigma_y().scale(self.y)
            + qubit::sigma_z().scale(self.z))
        .scale(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochChannel {
    /// Amplitude damping towards `|0⟩`.
    Lambda0,
    /// Amplitude damping towards `|1⟩`.
    Lambda1,
    /// The generalized amplitude damping channel `e^{𝓛θ t}`.
    LambdaTheta,
}

/// Affine action of the damping channels on a Bloch vector.
pub fn bloch_channel(kind: BlochChannel, r: BlochVector, t: f64, gamma: f64, theta: f64) -> BlochVector {
    let half = (-gamma * t / 2.0).exp();
    let full = (-gamma * t).exp();
    let z = match kind {
        BlochChannel::Lambda0 => 1.0 - full + full * r.z,
        BlochChannel::Lambda1 => full - 1.0 + full * r.z,
        BlochChannel::LambdaTheta => (2.0 * theta - 1.0) * (1.0 - full) + full * r.z,
    };
    BlochVector {
        x: half * r.x,
        y: half * r.y,
        z,
    }
}

/// Applies a Bloch-channel to a (not necessarily normalized) qubit operator by
/// linear extension.
fn bloch_channel_operator(kind: BlochChannel, op: &CMatrix, t: f64, gamma: f64, theta: f64) -> CMatrix {
    // op = (a𝟙 + r·σ)/2 with complex a, r; the channel is affine in r and
    // only moves the identity component along z.
    let tr = |o: CMatrix| (o * op).trace();
    let a = op.trace();
    let origin = bloch_channel(kind, BlochVector { x: 0.0, y: 0.0, z: 0.0 }, t, gamma, theta);
    let half = (-gamma * t / 2.0).exp();
    let full = (-gamma * t).exp();
    (CMatrix::identity(2, 2) * a
        + qubit::sigma_x() * (tr(qubit::sigma_x()) * half)
        + qubit::sigma_y() * (tr(qubit::sigma_y()) * half)
        + qubit::sigma_z() * (c(origin.z) * a + tr(qubit::sigma_z()) * full))
        .scale(0.5)
}

/// Evaluates `Φ(t)[ρ ⊗ ρθ] = Σᵢ Λᵢ(t)[ρ] ⟨i|ρθ|i⟩` on the joint input and
/// returns `max |Φ(t)[ρ ⊗ ρθ] − Λθ(t)[ρ]|` entrywise.
pub fn extended_channel_check(rho: &DensityMatrix, t: f64, gamma: f64, theta: f64) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch("extended channel acts on a qubit".into()));
    }
    let params = GadParams::new(theta, gamma)?;
    let joint = rho.matrix().kronecker(params.steady_state().matrix());
    let phi = extended_channel(&joint, t, gamma);
    let direct = bloch_channel_operator(BlochChannel::LambdaTheta, rho.matrix(), t, gamma, theta);
    Ok(max_abs(&(phi - direct)))
}

/// `Φ(t)` acting on a two-qubit operator (system ⊗ ancilla).
pub fn extended_channel(joint: &CMatrix, t: f64, gamma: f64) -> CMatrix {
    let mut out = CMatrix::zeros(2, 2);
    for (i, kind) in [(0usize, BlochChannel::Lambda0), (1, BlochChannel::Lambda1)] {
        // (𝟙 ⊗ ⟨i|) Ω (𝟙 ⊗ |i⟩)
        let block = CMatrix::from_fn(2, 2, |a, b| joint[(2 * a + i, 2 * b + i)]);
        out += bloch_channel_operator(kind, &block, t, gamma, 0.5);
    }
    out
}

/// Applies a single-site superoperator to site `site` of an `n_sites`-fold
/// tensor product of `d`-dimensional systems.
pub fn apply_local(chan: &Superoperator, rho: &CMatrix, site: usize, n_sites: usize) -> Result<CMatrix> {
    let d = chan.dim();
    let total = d.pow(n_sites as u32);
    if rho.nrows() != total || rho.ncols() != total || site >= n_sites {
        return Err(Error::DimensionMismatch(format!(
            "cannot apply a local map on site {site} of {n_sites} to a {}x{} operator",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let stride = d.pow((n_sites - 1 - site) as u32);
    let digit = |idx: usize| (idx / stride) % d;
    let replace = |idx: usize, v: usize| idx - digit(idx) * stride + v * stride;
    let m = chan.matrix();
    let mut out = CMatrix::zeros(total, total);
    for row in 0..total {
        for col in 0..total {
            let (i, j) = (digit(row), digit(col));
            let mut acc = c(0.0);
            for k in 0..d {
                for l in 0..d {
                    let coeff = m[(i + d * j, k + d * l)];
                    if coeff.norm_sqr() != 0.0 {
                        acc += coeff * rho[(replace(row, k), replace(col, l))];
                    }
                }
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}
