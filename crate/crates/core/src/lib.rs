//! Finite-`N` kernels, correlation functions, expected zero counts, scaling
//! limits and an exact starbody sampler for random polynomials distributed by
//! the reciprocal Mahler measure, over real and complex coefficients.

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complex_kernel;
pub mod density;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod limits;
pub mod linalg;
pub mod real_kernel;
pub mod sampler;
pub mod skew_system;
pub mod specfun;
pub mod verify;

pub use ensemble::{EnsembleParams, Field, PolynomialCoeffs};
pub use error::{Error, Result};
pub use specfun::C64;
