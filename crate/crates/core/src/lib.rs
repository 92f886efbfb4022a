//! Numerical toolkit for ℓ¹-bounded maps between noncommutative `L^p` spaces
//! over finite-dimensional tracial von Neumann algebras.
//!
//! The crate is `no_std` (it needs `alloc`). Algebras are weighted direct
//! sums of matrix blocks; everything else (norms, sequence spaces, linear
//! maps, Yeadon factorizations and ℓ¹ certificates) is built on top of them.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod certify;
pub mod config;
pub mod error;
mod linalg;
pub mod lp;
pub mod maps;
pub mod random;
pub mod sequence;
pub mod yeadon;

pub use algebra::{
    functional_calculus, polar, Algebra, AlgebraDescriptor, Block, Element, Interval, Polar,
    SpectralFunction,
};
pub use config::ToleranceConfig;
pub use error::{Error, Result};
pub use linalg::{Mat, C64};
pub use lp::{conjugate_exponent, disjoint, duality_pair, is_positive, lp_norm, norming_dual};
pub use maps::LinearMap;
pub use random::Sampler;
pub use sequence::{ElementSequence, Factorization, NormInterval};
