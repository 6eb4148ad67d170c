//! Truncated power-series arithmetic.
//!
//! [`XSeries`] holds a function of the spatial variables as a total-degree
//! truncated Taylor jet around a base point. [`SigmaSeries`] is a series in
//! the transverse variable (`T`, or `s = T^(1/m)`) whose coefficients are
//! `XSeries`; it doubles as a bounded Laurent window when its valuation is
//! negative.

mod layout;
mod sigma;
mod xseries;

pub use layout::{Exponent, Layout};
pub use sigma::{SigmaKind, SigmaSeries, EXACT_ORDER};
pub use xseries::{XFrame, XSeries};
