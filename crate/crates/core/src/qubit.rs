//! Single-qubit operators in the basis `|0⟩ = (1, 0)ᵀ`, `|1⟩ = (0, 1)ᵀ`.

use crate::opalg::{c, CMatrix, C64};

fn m2(a: C64, b: C64, cc: C64, d: C64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// `σ₋ = |0⟩⟨1|`.
pub fn sigma_minus() -> CMatrix {
    m2(c(0.0), c(1.0), c(0.0), c(0.0))
}

/// `σ₊ = |1⟩⟨0|`.
pub fn sigma_plus() -> CMatrix {
    m2(c(0.0), c(0.0), c(1.0), c(0.0))
}

pub fn sigma_x() -> CMatrix {
    m2(c(0.0), c(1.0), c(1.0), c(0.0))
}

pub fn sigma_y() -> CMatrix {
    m2(c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0))
}

/// `σ_z = |0⟩⟨0| − |1⟩⟨1|`.
pub fn sigma_z() -> CMatrix {
    m2(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// `|k⟩⟨k|`.
pub fn projector(k: usize) -> CMatrix {
    let mut p = CMatrix::zeros(2, 2);
    p[(k, k)] = c(1.0);
    p
}
