//! Fréchet p-means `ν_p = argmin_a E|X − a|^p`, their trajectories in p, and
//! certificates of true skewness: `p ↦ ν_p` strictly monotone and on the
//! correct side of the mode.
//!
//! - [`dist`]: distribution families, affine specs and a small mini-language.
//! - [`pmean`]: the balance-equation solver, curve tracing and discrete laws.
//! - [`criteria`]: sufficient criteria and the verdict pipeline.
//! - [`piecewise`]: exact piecewise-polynomial densities and convolutions.
//! - [`mv`]: multivariate p-means for the skew-normal family.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod dist;
pub mod error;
pub mod mv;
pub mod piecewise;
pub mod pmean;
pub mod quadrature;
mod roots;
pub mod special;

pub use error::{Error, Result};

/// Formats a number with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
