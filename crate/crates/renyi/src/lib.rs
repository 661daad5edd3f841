//! Rényi information measures for finite and Poisson channels.
//!
//! The crate computes Rényi divergences, informations, means, capacities,
//! radii and centers; the sphere-packing, average sphere-packing and
//! Haroutunian exponents; finite-blocklength inner and outer bounds on the
//! error probability of list codes on product channels with and without
//! feedback; and closed forms for Poisson channels. The [`oracle`] module
//! holds brute-force evaluators used to certify the inequalities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod capacity;
pub mod channels;
mod error;
pub mod exponents;
pub mod measures;
pub mod oracle;
pub mod poisson;
pub(crate) mod roots;
pub mod sampling;

pub use error::{Error, Result};
pub use measures::{ExtReal, FiniteMeasure, Order, OrderClass, ProbabilityMeasure};

/// Formats a real with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.11e}")
    }
}
