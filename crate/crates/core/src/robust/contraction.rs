use crate::curve::{interval_bound_log, LN_15};
use crate::error::Error;
use crate::field::FieldSpec;
use crate::flow::{Advance, FlowDriver, FlowState, IntegratorConfig, Unperturbed};
use crate::logmag::SignedLog;
use std::f64::consts::LN_2;

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub band: usize,
    pub height: usize,
    pub j: u32,
    /// Time from `s^i_l` to the first probe at `s^i_{l+1} - ε`.
    pub elapsed: f64,
    /// Largest `ln|ρ| - (ln A_{i,l+1} - (j+1) ln 2)` over the probes.
    pub worst_margin: f64,
    /// Curve parameter of the worst probe.
    pub worst_u: f64,
    pub pass: bool,
}

/// Start at `u = l` with `ln|ρ| = ln A_{i,l} - j ln 2` and check
/// `ln|ρ| < ln A_{i,l+1} - (j+1) ln 2` at `probes` points with `|s - s^i_{l+1}| < ε`.
pub fn contraction_check(
    fs: &FieldSpec,
    band: usize,
    l: usize,
    j: u32,
    probes: usize,
) -> Result<ContractionReport, Error> {
    if j < 1 || probes == 0 {
        return Err(Error::Config("contraction check needs j >= 1 and at least one probe".into()));
    }
    let m = fs.machine().states();
    let cfg = IntegratorConfig { lmax: l + 1, ..Default::default() };
    let drv = FlowDriver::new(fs, band, &Unperturbed, &cfg)?;
    if l + 1 > drv.chart().family().budget() {
        return Err(Error::BudgetExhausted { u: (l + 1) as f64, budget: drv.chart().family().budget() });
    }
    let start = interval_bound_log(m, band, l).scale_ln(-(j as f64) * LN_2);
    let bound = interval_bound_log(m, band, l + 1).scale_ln(-((j + 1) as f64) * LN_2);
    let eps = fs.eps();
    let top = l as f64 + 1.0;
    let mut st = FlowState::new(l as f64, SignedLog::new(1, start));
    let mut rep = ContractionReport {
        band,
        height: l,
        j,
        elapsed: 0.0,
        worst_margin: f64::NEG_INFINITY,
        worst_u: top,
        pass: true,
    };
    for k in 0..probes {
        let target = top - eps + 2.0 * eps * (k as f64 + 0.5) / probes as f64;
        if let Advance::Reached(s) = drv.advance_to(st, target, None, None)? {
            st = s;
        }
        if k == 0 {
            rep.elapsed = st.t;
        }
        let margin = st.rho.magnitude().map_or(f64::NEG_INFINITY, |r| r.ln_minus(&bound));
        if margin > rep.worst_margin {
            rep.worst_margin = margin;
            rep.worst_u = st.u;
        }
    }
    rep.pass = rep.worst_margin < 0.0;
    Ok(rep)
}

/// Largest Λ for which a time of `(1 - ε)/(16Λ)` per height drops `ln|ρ|` by
/// `9·10^level ln 15 + ln 2`, the actual log-ratio `ln(A_{i,l}/A_{i,l+1}) + ln 2`
/// at `level = i + l + 1`.
pub fn contraction_rate_bound(level: u32, eps: f64) -> f64 {
    (1.0 - eps) / (16.0 * (9.0 * 10f64.powi(level as i32) * LN_15 + LN_2))
}

/// `ln A_{i,l} - ln A_{i,l+1}` in closed form.
pub fn bound_log_ratio(i: usize, l: usize) -> f64 {
    9.0 * 10f64.powi((i + l + 1) as i32) * LN_15
}
