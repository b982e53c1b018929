// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod diff;
pub mod error;
pub mod evaluation;
pub mod network;
pub mod pacmann;
pub mod pde;
pub mod samplers;
pub mod seed;
pub mod trainer;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/derivatives.md")]
    pub struct Derivatives;
    #[doc = include_str!("../../../book/src/problems.md")]
    pub struct Problems;
    #[doc = include_str!("../../../book/src/samplers.md")]
    pub struct Samplers;
    #[doc = include_str!("../../../book/src/pacmann.md")]
    pub struct Pacmann;
    #[doc = include_str!("../../../book/src/training.md")]
    pub struct Training;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
