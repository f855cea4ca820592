//! Numerical toolkit for Fourier extension operators on nondegenerate
//! hypersurfaces.
//!
//! The crate covers the full pipeline from phase functions and their
//! Legendre-dual phases, through brute-force and stationary-phase kernel
//! evaluation, Littlewood-Paley projections and the mixed / weak / Sobolev /
//! weighted norms, to parameterized experiments that fit scaling exponents
//! and compare them against closed-form critical exponents.
//!
//! Everything is restricted to spatial dimension `d = 1` or `d = 2`.

// NaN must fail every range check, hence `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod grid;
pub mod kernel;
pub mod norms;
pub mod phase;
pub mod propagators;
pub mod quadrature;

pub use error::{Error, Result};

/// Complex scalar used for every field.
pub type Complex = num_complex::Complex64;

/// A point of `R^d` for `d <= 2`. For `d = 1` the second component is zero.
pub type Point = [f64; 2];
