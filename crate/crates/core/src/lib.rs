//! Open-system pointer measurements of a thermally damped qubit.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cqed;
pub mod error;
pub mod liouville;
pub mod metrology;
pub mod opalg;
pub mod pointer;
pub mod qubit;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/damped-qubit.md")]
    mod damped_qubit {}
    #[doc = include_str!("../../../book/src/pointer.md")]
    mod pointer {}
    #[doc = include_str!("../../../book/src/povm.md")]
    mod povm {}
    #[doc = include_str!("../../../book/src/fisher.md")]
    mod fisher {}
    #[doc = include_str!("../../../book/src/resonator.md")]
    mod resonator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
