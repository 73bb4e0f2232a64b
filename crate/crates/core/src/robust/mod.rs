//! Scheduled perturbations, the contraction and Gronwall certificates, and
//! the tape-size resource estimate.

mod contraction;
mod perturbation;
mod resource;

pub use contraction::{bound_log_ratio, contraction_check, contraction_rate_bound, ContractionReport};
pub use perturbation::{PerturbationSpec, X_BUMPS};
pub use resource::{resource_estimate, tape_from_memory, ResourceEstimate};

use crate::error::Error;
use crate::field::FieldSpec;
use crate::flow::{Advance, FlowDriver, FlowState, IntegratorConfig, Perturbation, Unperturbed};
use crate::logmag::{LogMagnitude, SignedLog};

/// `(ε_K/M)(e^{Mτ} - 1)`.
pub fn gronwall_radius(m: f64, tau: f64, eps_k: f64) -> f64 {
    eps_k / m * (m * tau).exp_m1()
}

/// [`gronwall_radius`] with `ε_K` in log form; stable for large `Mτ`.
pub fn gronwall_radius_log(m: f64, tau: f64, eps_k: LogMagnitude) -> LogMagnitude {
    let mt = m * tau;
    let growth = if mt > 30.0 { mt + (-(-mt).exp()).ln_1p() } else { mt.exp_m1().ln() };
    eps_k.scale_ln(growth - m.ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GronwallReport {
    /// Largest observed `|γ_P(t) - γ_0(t)|`; `None` if the runs coincide.
    pub observed: Option<LogMagnitude>,
    pub bound: LogMagnitude,
    pub eps_k: LogMagnitude,
    pub tau: f64,
}

impl GronwallReport {
    pub fn holds(&self) -> bool {
        self.observed.is_none_or(|o| o <= self.bound)
    }
}

/// Integrate the perturbed and unperturbed chart flows from `(u, ρ) = (l, 0)`
/// with identical fixed steps through box `K^i_l` and compare with the
/// Gronwall radius for `ε_K` = the cap of slot `l`.
pub fn gronwall_empirical(
    fs: &FieldSpec,
    band: usize,
    l: usize,
    pert: &PerturbationSpec,
    m_bound: f64,
    steps: usize,
) -> Result<GronwallReport, Error> {
    let eps_k = pert.cap(band, l).ok_or_else(|| Error::Config(format!("no perturbation cap for box ({band}, {l})")))?;
    let cfg = IntegratorConfig { lmax: l + 1, ..Default::default() };
    let base = FlowDriver::new(fs, band, &Unperturbed, &cfg)?;
    let pert_drv = FlowDriver::new(fs, band, pert as &dyn Perturbation, &cfg)?;
    let start = FlowState::new(l as f64, SignedLog::ZERO);
    let Advance::Reached(end) = base.advance_to(start, l as f64 + 1.0, None, None)? else {
        unreachable!("no window given")
    };
    let h = end.t / steps.max(1) as f64;
    let (mut a, mut b) = (start, start);
    let mut observed: Option<LogMagnitude> = None;
    for _ in 0..steps {
        let (na, nb) = (base.rk_step(&a, h)?, pert_drv.rk_step(&b, h)?);
        if na.u > l as f64 + 1.0 || nb.u > l as f64 + 1.0 {
            break;
        }
        a = na;
        b = nb;
        let speed = base.chart().frame(a.u)?.speed;
        let du = (b.u - a.u).abs() * speed;
        let drho = b.rho.add(a.rho.neg()).magnitude();
        let d = match (du > 0.0, drho) {
            (true, Some(r)) => Some(LogMagnitude::from_value(du).add(r)),
            (true, None) => Some(LogMagnitude::from_value(du)),
            (false, r) => r,
        };
        if let Some(d) = d {
            observed = Some(observed.map_or(d, |o| o.max(d)));
        }
    }
    let tau = a.t;
    Ok(GronwallReport { observed, bound: gronwall_radius_log(m_bound, tau, eps_k), eps_k, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ErrorSchedule, FieldParams};
    use crate::machine::presets;

    #[test]
    fn radius_examples() {
        assert_eq!(gronwall_radius(2.0, 1.0, 0.0), 0.0);
        let r = gronwall_radius(2.0, 1.0, 0.5);
        assert!((r - 0.25 * (2f64.exp() - 1.0)).abs() < 1e-15);
        let l = gronwall_radius_log(2.0, 1.0, LogMagnitude::from_value(0.5));
        assert!((l.value() - r).abs() < 1e-14);
    }

    #[test]
    fn radius_monotone() {
        let base = gronwall_radius(1.5, 2.0, 1e-3);
        assert!(gronwall_radius(1.6, 2.0, 1e-3) > base);
        assert!(gronwall_radius(1.5, 2.1, 1e-3) > base);
        assert!(gronwall_radius(1.5, 2.0, 2e-3) > base);
    }

    #[test]
    fn scheduled_radius_below_target() {
        // ε_K = ε₀ ε^i_l gives a radius of at most ε₀ min{ε/2, A_{i,l+1}/8}
        let s = ErrorSchedule::new(0.8, 14_000.0, 0.1, 0.01, 3, 6);
        for l in 0..5 {
            let eps_k = s.cap(1, l).unwrap();
            let r = gronwall_radius_log(s.m_bound(), s.tau(), eps_k);
            let target = s.threshold(1, l).unwrap().scale_ln(-s.factor_ln()).scale_ln(0.1f64.ln());
            assert!(r.ln_minus(&target) < 1e-9 * target.ln().abs().max(1.0));
        }
    }

    #[test]
    fn empirical_divergence_within_radius() {
        let fs = FieldSpec::compile(&presets::bounce(), &FieldParams { inputs: 2, heights: 3, ..Default::default() })
            .unwrap();
        // a visible cap so the difference is not lost in rounding
        let p = PerturbationSpec::uniform(LogMagnitude::from_value(1e-7), 2, 3, 5);
        let rep = gronwall_empirical(&fs, 1, 1, &p, 1.0, 400).unwrap();
        assert!(rep.observed.is_some());
        assert!(rep.holds(), "{rep:?}");
    }
}
