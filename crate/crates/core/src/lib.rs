//! Singular solutions of nonlinear wave equations `u_tt - Delta u = f(t, x; u_t, grad u)`
//! built by Fuchsian reduction near a prescribed blowup surface `t = psi(x)`.
//!
//! The pipeline is: [`geometry`] checks the compatibility conditions, [`reduction`]
//! turns the equation into a slice evaluator for the regular part, [`fuchsian`]
//! solves it order by order and [`verify`] substitutes the result back.

pub mod cli;
pub mod error;
pub mod fuchsian;
pub mod geometry;
pub mod nonlinearity;
pub mod reduction;
pub mod scalar;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
