use super::{classify_crossing, confined, EventRecord, IntegratorConfig, Perturbation};
use crate::curve::BandChart;
use crate::error::Error;
use crate::field::FieldSpec;
use crate::logmag::SignedLog;

/// A point of a chart trajectory: time, curve parameter and normal offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub u: f64,
    pub rho: SignedLog,
}

impl FlowState {
    pub fn new(u: f64, rho: SignedLog) -> Self {
        FlowState { t: 0.0, u, rho }
    }
}

/// Right-hand side at one point: `du/dt`, the damping factor `g` and `P_ρ`.
#[derive(Clone, Copy, Debug)]
pub struct Rates {
    pub du: f64,
    pub g: f64,
    pub p_rho: SignedLog,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Advance {
    Reached(FlowState),
    /// First accepted state outside the window.
    LeftWindow(FlowState),
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub band: usize,
    pub points: Vec<FlowState>,
    pub events: Vec<EventRecord>,
}

/// Integrates `u' = g(Λ/(1-κρ) + P_s)/|γ'|`, `ρ' = g(-ρ + P_ρ)` on one band.
pub struct FlowDriver<'a> {
    fs: &'a FieldSpec,
    band: usize,
    chart: &'a BandChart,
    pert: &'a dyn Perturbation,
    damping: Option<&'a (dyn Fn(f64, f64) -> f64 + Sync)>,
    cfg: &'a IntegratorConfig,
}

// weights (c0, c1) of the start and end values of a linearly varying forcing
// in ∫_0^h g e^{-g(h-τ)} P(τ) dτ, with a = gh
fn forcing_weights(a: f64) -> (f64, f64) {
    let e1 = -(-a).exp_m1();
    let c1 = if a < 1e-3 { a / 2.0 - a * a / 6.0 + a * a * a / 24.0 } else { 1.0 - e1 / a };
    (e1 - c1, c1)
}

impl<'a> FlowDriver<'a> {
    pub fn new(
        fs: &'a FieldSpec,
        band: usize,
        pert: &'a dyn Perturbation,
        cfg: &'a IntegratorConfig,
    ) -> Result<Self, Error> {
        cfg.validate()?;
        Ok(FlowDriver { fs, band, chart: fs.chart(band)?, pert, damping: None, cfg })
    }

    /// Multiply the field by a positive factor `g(x, y)`.
    pub fn with_damping(mut self, g: &'a (dyn Fn(f64, f64) -> f64 + Sync)) -> Self {
        self.damping = Some(g);
        self
    }

    pub fn chart(&self) -> &BandChart {
        self.chart
    }

    pub fn config(&self) -> &IntegratorConfig {
        self.cfg
    }

    pub fn position(&self, st: &FlowState) -> Result<(f64, f64), Error> {
        self.chart.param_to_plane(st.u, st.rho.to_f64())
    }

    pub fn rates(&self, u: f64, rho: f64) -> Result<Rates, Error> {
        let need_xy = self.damping.is_some() || !self.pert.is_zero();
        let (lam, d1, d2) = if need_xy {
            self.chart.family().lambda_eval(u)?
        } else {
            let (d1, d2) = self.chart.family().derivatives(u)?;
            (f64::NAN, d1, d2)
        };
        let speed = (1.0 + d1 * d1).sqrt();
        let kappa = -d2 / (speed * speed * speed);
        let tangent = [d1 / speed, 1.0 / speed];
        let normal = [-1.0 / speed, d1 / speed];
        let denom = 1.0 - kappa * rho;
        let mut ds = self.fs.lambda() / denom;
        let mut p_rho = SignedLog::ZERO;
        let mut g = 1.0;
        let (x, y) = (lam + rho * normal[0], u + rho * normal[1]);
        if let Some(damp) = self.damping {
            g = damp(x, y);
        }
        if !need_xy {
            return Ok(Rates { du: ds / speed, g, p_rho });
        }
        if let Some((scale, v)) = self.pert.eval(x, y) {
            let vs = (v[0] * tangent[0] + v[1] * tangent[1]) / denom;
            let vr = v[0] * normal[0] + v[1] * normal[1];
            ds += scale.value() * vs;
            p_rho = SignedLog::new(vr.signum() as i8 * (vr != 0.0) as i8, scale.scale_ln(vr.abs().ln()));
        }
        Ok(Rates { du: g * ds / speed, g, p_rho })
    }

    fn rho_after(rho: SignedLog, a: f64, p0: SignedLog, p1: SignedLog) -> SignedLog {
        let (c0, c1) = forcing_weights(a);
        rho.scale_ln(-a).add(p0.mul_f64(c0)).add(p1.mul_f64(c1))
    }

    /// One classical RK4 step of length `h`; `ρ` advanced by the exponential rule.
    pub fn rk_step(&self, st: &FlowState, h: f64) -> Result<FlowState, Error> {
        let r0 = st.rho.to_f64();
        let k1 = self.rates(st.u, r0)?;
        let rho_mid = |k: &Rates| Self::rho_after(st.rho, k.g * h / 2.0, k1.p_rho, k.p_rho).to_f64();
        let k2 = self.rates(st.u + 0.5 * h * k1.du, rho_mid(&k1))?;
        let k3 = self.rates(st.u + 0.5 * h * k2.du, rho_mid(&k2))?;
        let rho_end = Self::rho_after(st.rho, k3.g * h, k1.p_rho, k3.p_rho).to_f64();
        let k4 = self.rates(st.u + h * k3.du, rho_end)?;
        let u = st.u + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
        let g = (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g) / 6.0;
        let rho = Self::rho_after(st.rho, g * h, k1.p_rho, k4.p_rho);
        Ok(FlowState { t: st.t + h, u, rho })
    }

    fn check(&self, st: &FlowState) -> Result<(), Error> {
        if confined(&st.rho) {
            Ok(())
        } else {
            Err(Error::ConfinementViolation { band: self.band, u: st.u })
        }
    }

    /// Integrate until `u = target`, snapping the final state onto the crossing.
    /// With `window`, stop at the first accepted state farther than it from the origin.
    pub fn advance_to(
        &self,
        mut st: FlowState,
        target: f64,
        mut record: Option<&mut Vec<FlowState>>,
        window: Option<f64>,
    ) -> Result<Advance, Error> {
        let cfg = self.cfg;
        let margin = 0.5 * self.fs.eps();
        let mut h = f64::INFINITY;
        self.check(&st)?;
        while st.u < target {
            let du = self.rates(st.u, st.rho.to_f64())?.du;
            if !(du > 0.0) {
                return Err(Error::Machine(format!("flow stalled at u = {} (du/dt = {du})", st.u)));
            }
            h = h.min(cfg.max_step).min(cfg.max_du / du).min((target + margin - st.u) / du);
            let full = self.rk_step(&st, h)?;
            let half = self.rk_step(&self.rk_step(&st, 0.5 * h)?, 0.5 * h)?;
            let err = (full.u - half.u).abs() / 15.0;
            let tol = cfg.atol + cfg.rtol * (half.u - st.u).abs();
            if err > tol {
                h *= (0.9 * (tol / err).powf(0.2)).max(0.2);
                continue;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(1.0, 5.0) };
            if half.u >= target {
                st = self.bisect_crossing(&st, h, target)?;
                self.check(&st)?;
                break;
            }
            st = half;
            self.check(&st)?;
            if let Some(rec) = record.as_deref_mut() {
                rec.push(st);
            }
            if let Some(n) = window {
                let (x, y) = self.position(&st)?;
                if x.hypot(y) > n {
                    return Ok(Advance::LeftWindow(st));
                }
            }
            h *= grow;
        }
        if let Some(rec) = record {
            rec.push(st);
        }
        Ok(Advance::Reached(st))
    }

    fn bisect_crossing(&self, st: &FlowState, h: f64, target: f64) -> Result<FlowState, Error> {
        let (mut lo, mut hi) = (0.0, h);
        let mut best = self.rk_step(st, h)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let cand = self.rk_step(st, mid)?;
            if cand.u >= target {
                hi = mid;
                best = cand;
            } else {
                lo = mid;
            }
            if (best.u - target).abs() < self.cfg.crossing_tol || hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        best.u = target;
        Ok(best)
    }

    pub fn event(&self, st: &FlowState, height: usize) -> Result<EventRecord, Error> {
        Ok(EventRecord {
            band: self.band,
            height,
            t: st.t,
            s: self.chart.family().arc_length_heights()[height],
            rho: st.rho,
            class: classify_crossing(self.fs, self.band, height, st.rho)?,
        })
    }
}

/// Integrate from `start` through every integer height up to `cfg.lmax`,
/// classifying each crossing.
pub fn integrate_chart(
    fs: &FieldSpec,
    band: usize,
    start: FlowState,
    pert: &dyn Perturbation,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, Error> {
    let drv = FlowDriver::new(fs, band, pert, cfg)?;
    let top = cfg.lmax.min(drv.chart.family().budget());
    let mut out = Trajectory { band, points: vec![start], events: Vec::new() };
    let mut st = start;
    let mut next = if start.u <= 0.0 { 0 } else { start.u.ceil() as usize };
    if start.u == next as f64 {
        out.events.push(drv.event(&st, next)?);
        next += 1;
    }
    while next <= top {
        let rec = cfg.record_trajectory.then_some(&mut out.points);
        match drv.advance_to(st, next as f64, rec, None)? {
            Advance::Reached(s) => st = s,
            Advance::LeftWindow(_) => unreachable!("no window given"),
        }
        out.events.push(drv.event(&st, next)?);
        next += 1;
    }
    Ok(out)
}

/// `ln` of the unperturbed normal offset: `ln|ρ(t)| = ln|ρ(0)| - t`.
pub fn unperturbed_rho(rho0: SignedLog, t: f64) -> SignedLog {
    rho0.scale_ln(-t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::flow::{Classification, Unperturbed};
    use crate::machine::presets;

    fn field(m: &crate::machine::MachineSpec, inputs: usize, heights: usize) -> FieldSpec {
        FieldSpec::compile(m, &FieldParams { inputs, heights, ..Default::default() }).unwrap()
    }

    #[test]
    fn forcing_weights_limits() {
        let (c0, c1) = forcing_weights(1e-6);
        assert!((c0 - 0.5e-6).abs() < 1e-12 && (c1 - 0.5e-6).abs() < 1e-12);
        let (c0, c1) = forcing_weights(50.0);
        assert!((c0 - 0.02).abs() < 1e-12 && (c1 - 0.98).abs() < 1e-12);
        for a in [1e-4, 1e-2, 0.5, 3.0] {
            let (c0, c1) = forcing_weights(a);
            assert!((c0 + c1 - (1.0 - (-a).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn rho_decays_exactly() {
        let fs = field(&presets::bounce(), 2, 3);
        let cfg = IntegratorConfig { lmax: 3, record_trajectory: true, ..Default::default() };
        let rho0 = SignedLog::from_f64(1e-3);
        let tr = integrate_chart(&fs, 1, FlowState::new(0.0, rho0), &Unperturbed, &cfg).unwrap();
        assert!(tr.points.len() > 10);
        for p in &tr.points {
            let expect = rho0.ln_abs() - p.t;
            assert!((p.rho.ln_abs() - expect).abs() <= 1e-12 * expect.abs().max(1.0), "{p:?}");
        }
    }

    #[test]
    fn straight_segment_time_matches_speed() {
        // the instant machine never moves: the curve is the vertical line x = x_0
        let fs = field(&presets::instant(), 1, 3);
        let cfg = IntegratorConfig { lmax: 3, ..Default::default() };
        let tr = integrate_chart(&fs, 0, FlowState::new(0.0, SignedLog::ZERO), &Unperturbed, &cfg).unwrap();
        let t3 = tr.events[3].t;
        assert!((t3 - 3.0 / fs.lambda()).abs() < 1e-9 * t3, "{t3}");
        assert!(tr.events.iter().all(|e| matches!(e.class, Classification::InsideBox(_))));
    }

    #[test]
    fn crossing_times_increase() {
        let fs = field(&presets::countdown(), 3, 4);
        let cfg = IntegratorConfig { lmax: 4, ..Default::default() };
        let tr = integrate_chart(&fs, 2, FlowState::new(0.0, SignedLog::ZERO), &Unperturbed, &cfg).unwrap();
        assert_eq!(tr.events.len(), 5);
        for w in tr.events.windows(2) {
            assert!(w[1].t > w[0].t);
            // speed along the arc is Λ on the curve itself
            let dt = (w[1].s - w[0].s) / fs.lambda();
            assert!((w[1].t - w[0].t - dt).abs() < 1e-6 * dt);
        }
    }

    #[test]
    fn confinement_violation_reported() {
        let fs = field(&presets::bounce(), 1, 2);
        let cfg = IntegratorConfig { lmax: 2, ..Default::default() };
        let drv = FlowDriver::new(&fs, 0, &Unperturbed, &cfg).unwrap();
        let st = FlowState::new(0.0, SignedLog::from_f64(0.07));
        assert!(matches!(drv.advance_to(st, 1.0, None, None), Err(Error::ConfinementViolation { .. })));
    }
}
