//! Trajectories of the chart flow, height crossings and computation verdicts.
//!
//! The tangential coordinate is integrated in the curve parameter `u`
//! (height of the foot point), so crossing height `l` is exactly `u = l`.
//! The normal coordinate `ρ` is carried as a [`SignedLog`] and advanced with
//! the exact exponential integrator of `dρ/dt = g(-ρ + P_ρ)`.

mod integrator;
mod ns;
mod simulate;

pub use integrator::{integrate_chart, unperturbed_rho, Advance, FlowDriver, FlowState, Rates, Trajectory};
pub use ns::{ns_time_budget, NsBudget};
pub use simulate::{simulate_bounded, simulate_input, simulate_input_from, SimulationOutcome};

use crate::curve::CHART_HALF_WIDTH;
use crate::error::Error;
use crate::field::FieldSpec;
use crate::logmag::{LogMagnitude, SignedLog};
use crate::machine::{Configuration, EncodedPoint};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest time step.
    pub max_step: f64,
    /// Largest change of the height parameter per step.
    pub max_du: f64,
    /// Crossing tolerance in the height parameter.
    pub crossing_tol: f64,
    /// Height budget `L_max`.
    pub lmax: usize,
    /// Window radius `N` for bounded runs.
    pub window: f64,
    pub record_trajectory: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: 1e4,
            max_du: 0.02,
            crossing_tol: 1e-12,
            lmax: 20,
            window: 25.0,
            record_trajectory: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.max_step > 0.0 && self.max_du > 0.0) {
            return Err(Error::Config("integrator tolerances and step limits must be positive".into()));
        }
        if !(self.crossing_tol > 0.0) || self.lmax == 0 {
            return Err(Error::Config("crossing tolerance must be positive and L_max >= 1".into()));
        }
        Ok(())
    }
}

/// A perturbation `P(x, y) = e^{scale} v` of the planar field. `None` means zero.
pub trait Perturbation: Sync {
    fn eval(&self, x: f64, y: f64) -> Option<(LogMagnitude, [f64; 2])>;

    /// `true` only if `eval` always returns `None`.
    fn is_zero(&self) -> bool {
        false
    }
}

/// The zero perturbation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unperturbed;

impl Perturbation for Unperturbed {
    fn eval(&self, _: f64, _: f64) -> Option<(LogMagnitude, [f64; 2])> {
        None
    }

    fn is_zero(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    InsideBox(EncodedPoint),
    Miss,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub band: usize,
    pub height: usize,
    pub t: f64,
    /// Arc length `s^i_l` of the crossing.
    pub s: f64,
    pub rho: SignedLog,
    pub class: Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimulationVerdict {
    Halted { point: EncodedPoint, height: usize },
    Loop,
    OutOfMemory { height: usize },
    LeftWindow,
    Unresolved { budget: usize },
}

impl fmt::Display for SimulationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulationVerdict::Halted { point, height } => {
                write!(f, "HALTED {} {} {} {}", point.q, point.r, point.s, height)
            }
            SimulationVerdict::Loop => write!(f, "LOOP"),
            SimulationVerdict::OutOfMemory { .. } => write!(f, "OOM"),
            SimulationVerdict::LeftWindow => write!(f, "LEFT_WINDOW"),
            SimulationVerdict::Unresolved { budget } => write!(f, "UNRESOLVED {budget}"),
        }
    }
}

/// Output constraint `t* = (t*_{-k}, …, t*_k)` and its halting boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltingSetSpec {
    digits: Vec<u8>,
}

impl HaltingSetSpec {
    /// `digits` lists positions `-k..=k`; its length must be odd.
    pub fn new(digits: Vec<u8>) -> Result<Self, Error> {
        if digits.len().is_multiple_of(2) || digits.iter().any(|&d| d > 9) {
            return Err(Error::Config("t* must have odd length and decimal digits".into()));
        }
        Ok(HaltingSetSpec { digits })
    }

    /// The window of `c` around the head with half-width `k`.
    pub fn around(c: &Configuration, k: usize) -> Self {
        let k = k as i64;
        HaltingSetSpec { digits: (-k..=k).map(|p| c.digit(p)).collect() }
    }

    pub fn k(&self) -> usize {
        self.digits.len() / 2
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Box `(q, r, s)` lies in `J_{t*}`: halting state and matching digits.
    pub fn contains(&self, p: &EncodedPoint, halt: u32) -> bool {
        if p.q != halt {
            return false;
        }
        let c = Configuration::new(p.q, p.r.clone(), p.s.clone());
        self.matches(&c)
    }

    pub fn matches(&self, c: &Configuration) -> bool {
        let k = self.k() as i64;
        (-k..=k).zip(&self.digits).all(|(p, &d)| c.digit(p) == d)
    }
}

/// Decide whether `|ρ|` at height `l` lies inside the box of `Δ^l(c_i)`.
pub fn classify_crossing(fs: &FieldSpec, band: usize, height: usize, rho: SignedLog) -> Result<Classification, Error> {
    let chart = fs.chart(band)?;
    let point = chart
        .family()
        .point(height)
        .ok_or(Error::BudgetExhausted { u: height as f64, budget: chart.family().budget() })?
        .clone();
    let Some(mag) = rho.magnitude() else {
        return Ok(Classification::InsideBox(point));
    };
    let hw = point.ln_half_width();
    let d = mag.ln_minus(&hw);
    let guard = 1e-9 * hw.ln().abs().clamp(1.0, 1e300);
    Ok(if d < -guard { Classification::InsideBox(point) } else { Classification::Miss })
}

/// `|ρ| < 1/16` in log space.
pub fn confined(rho: &SignedLog) -> bool {
    rho.magnitude().is_none_or(|m| m.ln() < CHART_HALF_WIDTH.ln())
}
