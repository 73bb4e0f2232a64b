//! Interpolating curves through the encoded configurations of one input,
//! and their tubular charts.

mod bump;
mod chart;
mod family;

pub use bump::{bump, bump_prime, BumpProfile};
pub use chart::{BandChart, Frame, CHART_HALF_WIDTH};
pub use family::CurveFamily;

use crate::logmag::LogMagnitude;
use std::f64::consts::LN_2;

pub const LN_15: f64 = 2.708_050_201_102_21;

/// `A_{i,l} = 2^{-(m+4)} 15^{-10^{i+l+1}}`, the lower bound on interval widths
/// at height `l` of band `i` for a machine with `m` states.
pub fn interval_bound_log(m: u32, i: usize, l: usize) -> LogMagnitude {
    LogMagnitude::levelled(-((m + 4) as f64) * LN_2, LN_15, (i + l + 1) as u32)
}
