use std::ops::{Add, Mul, Sub};

use super::{c, devectorize, expm, vectorize, CMatrix, CVector, C64, EXPM_TOL};
use crate::error::{Error, Result};

/// A linear map on `d × d` operators, stored as a `d² × d²` matrix acting on
/// column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on {dim}x{dim} operators needs a {n}x{n} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        super::check_finite(&matrix, "superoperator")?;
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self {
            dim: a.nrows(),
            matrix: b.transpose().kronecker(a),
        }
    }

    /// `X ↦ A X`.
    pub fn left(a: &CMatrix) -> Self {
        Self::sandwich(a, &CMatrix::identity(a.nrows(), a.nrows()))
    }

    /// `X ↦ X B`.
    pub fn right(b: &CMatrix) -> Self {
        Self::sandwich(&CMatrix::identity(b.nrows(), b.nrows()), b)
    }

    /// `X ↦ -i[H, X]`.
    pub fn commutator(h: &CMatrix) -> Self {
        (Self::left(h) - Self::right(h)) * C64::new(0.0, -1.0)
    }

    /// Lindblad dissipator `X ↦ o X o† − ½{o†o, X}`.
    pub fn dissipator(o: &CMatrix) -> Self {
        let od = o.adjoint();
        let odo = &od * o;
        Self::sandwich(o, &od) - (Self::left(&odo) + Self::right(&odo)) * c(0.5)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, op: &CMatrix) -> Result<CMatrix> {
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on dimension {} applied to a {}x{} operator",
                self.dim,
                op.nrows(),
                op.ncols()
            )));
        }
        devectorize(&(&self.matrix * vectorize(op)?), self.dim)
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// Adjoint under the Hilbert–Schmidt pairing `⟨X, Y⟩ = tr(X†Y)`.
    pub fn dual(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `e^{t 𝓛}` for a generator `𝓛`.
    pub fn propagator(&self, t: f64) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            matrix: expm(&self.matrix.scale(t), EXPM_TOL)?,
        })
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &inner.matrix,
        }
    }

    /// `max |tr(𝓛 E_ij)|` over matrix units; zero for a trace-annihilating
    /// generator.
    pub fn generator_trace_defect(&self) -> f64 {
        let id = vectorize(&CMatrix::identity(self.dim, self.dim)).expect("square");
        let row = id.adjoint() * &self.matrix;
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |tr(Λ E_ij) − tr(E_ij)|`; zero for a trace-preserving map.
    pub fn channel_trace_defect(&self) -> f64 {
        let id = vectorize(&CMatrix::identity(self.dim, self.dim)).expect("square");
        let row = id.adjoint() * &self.matrix - id.adjoint();
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "superoperator dimensions differ");
        Self {
            dim: self.dim,
            matrix: self.matrix + rhs.matrix,
        }
    }
}

impl Sub for Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "superoperator dimensions differ");
        Self {
            dim: self.dim,
            matrix: self.matrix - rhs.matrix,
        }
    }
}

impl Mul<C64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix * rhs,
        }
    }
}

impl Mul<f64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Self {
        self * c(rhs)
    }
}
