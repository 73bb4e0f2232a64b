use super::integrator::{Advance, FlowDriver, FlowState};
use super::{Classification, EventRecord, HaltingSetSpec, IntegratorConfig, Perturbation, SimulationVerdict};
use crate::error::Error;
use crate::field::FieldSpec;
use crate::logmag::SignedLog;
use crate::machine::{Configuration, TapeBoundedSpec};
use std::collections::HashSet;

#[derive(Clone, Debug)]
pub struct SimulationOutcome {
    pub band: usize,
    pub verdict: SimulationVerdict,
    /// The first halting box reached lies in `J_{t*}`.
    pub hit: bool,
    pub events: Vec<EventRecord>,
    pub trajectory: Vec<FlowState>,
}

/// Run the unperturbed or perturbed flow from `p^i_0` until it reaches a box
/// of the halting set or exhausts the height budget.
pub fn simulate_input(
    fs: &FieldSpec,
    band: usize,
    target: &HaltingSetSpec,
    pert: &dyn Perturbation,
    cfg: &IntegratorConfig,
) -> Result<SimulationOutcome, Error> {
    simulate_input_from(fs, band, target, pert, cfg, FlowState::new(0.0, SignedLog::ZERO))
}

/// [`simulate_input`] from an arbitrary chart state.
pub fn simulate_input_from(
    fs: &FieldSpec,
    band: usize,
    target: &HaltingSetSpec,
    pert: &dyn Perturbation,
    cfg: &IntegratorConfig,
    start: FlowState,
) -> Result<SimulationOutcome, Error> {
    let drv = FlowDriver::new(fs, band, pert, cfg)?;
    let halt = fs.machine().halt();
    let lmax = cfg.lmax;
    if lmax > drv.chart().family().budget() {
        return Err(Error::Config(format!(
            "L_max = {lmax} exceeds the compiled curve budget {}",
            drv.chart().family().budget()
        )));
    }
    let mut out = SimulationOutcome {
        band,
        verdict: SimulationVerdict::Unresolved { budget: lmax },
        hit: false,
        events: Vec::new(),
        trajectory: vec![start],
    };
    let mut st = start;
    let mut next = if start.u <= 0.0 { 0 } else { start.u.ceil() as usize };
    while next <= lmax {
        if st.u < next as f64 {
            let rec = cfg.record_trajectory.then_some(&mut out.trajectory);
            st = match drv.advance_to(st, next as f64, rec, None)? {
                Advance::Reached(s) => s,
                Advance::LeftWindow(s) => s,
            };
        }
        let ev = drv.event(&st, next)?;
        let class = ev.class.clone();
        out.events.push(ev);
        if next >= 1 {
            if let Classification::InsideBox(p) = class {
                if p.q == halt {
                    out.hit = target.contains(&p, halt);
                    out.verdict = SimulationVerdict::Halted { point: p, height: next };
                    return Ok(out);
                }
            }
        }
        next += 1;
    }
    Ok(out)
}

/// Flow version of the bounded-tape classification: the head position is
/// tracked along the decoded boxes, and the run stops on halting, on the head
/// leaving the bounds, or when the trajectory leaves the window `‖(x, y)‖ > N`.
pub fn simulate_bounded(
    fs: &FieldSpec,
    band: usize,
    tb: &TapeBoundedSpec,
    pert: &dyn Perturbation,
    cfg: &IntegratorConfig,
) -> Result<SimulationOutcome, Error> {
    let drv = FlowDriver::new(fs, band, pert, cfg)?;
    let family = drv.chart().family();
    let input = family.config(0).ok_or(Error::UnknownBand(band))?;
    if !tb.fits(input) {
        let (lo, hi) = tb.bounds();
        return Err(Error::TapeOutOfBounds { lo, hi });
    }
    let m = &tb.base;
    let budget = family.budget();
    let mut out = SimulationOutcome {
        band,
        verdict: SimulationVerdict::Unresolved { budget },
        hit: false,
        events: Vec::new(),
        trajectory: Vec::new(),
    };
    let mut st = FlowState::new(0.0, SignedLog::ZERO);
    out.trajectory.push(st);
    let mut seen: HashSet<(Configuration, i64)> = HashSet::new();
    let mut certified = false;
    let mut prev: Option<Configuration> = None;
    let mut head = 0i64;
    for l in 0..=budget {
        if l > 0 {
            let rec = cfg.record_trajectory.then_some(&mut out.trajectory);
            match drv.advance_to(st, l as f64, rec, Some(cfg.window))? {
                Advance::Reached(s) => st = s,
                Advance::LeftWindow(_) => {
                    out.verdict = if certified { SimulationVerdict::Loop } else { SimulationVerdict::LeftWindow };
                    return Ok(out);
                }
            }
        }
        let ev = drv.event(&st, l)?;
        let class = ev.class.clone();
        out.events.push(ev);
        let Classification::InsideBox(p) = class else {
            return Ok(out);
        };
        let c = Configuration::new(p.q, p.r.clone(), p.s.clone());
        if let Some(pc) = &prev {
            let (_, shift) = m.step_with_shift(pc);
            head += shift.map_or(0, |s| s.head_delta());
            if !tb.contains(head) {
                out.verdict = SimulationVerdict::OutOfMemory { height: l };
                return Ok(out);
            }
        }
        if c.q == m.halt() {
            out.verdict = SimulationVerdict::Halted { point: p, height: l };
            return Ok(out);
        }
        if !seen.insert((c.clone(), head)) {
            certified = true;
        }
        prev = Some(c);
        let (x, y) = drv.position(&st)?;
        if x.hypot(y) > cfg.window {
            out.verdict = if certified { SimulationVerdict::Loop } else { SimulationVerdict::LeftWindow };
            return Ok(out);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::flow::Unperturbed;
    use crate::machine::{presets, run, run_bounded, BoundedVerdict, RunVerdict};

    #[test]
    fn countdown_matches_direct_run() {
        let m = presets::countdown();
        let fs = FieldSpec::compile(&m, &FieldParams { inputs: 5, heights: 10, ..Default::default() }).unwrap();
        let cfg = IntegratorConfig { lmax: 10, ..Default::default() };
        for inp in fs.inputs() {
            let direct = run(&m, &inp.config, 10);
            let t = HaltingSetSpec::around(&inp.config, 1);
            let out = simulate_input(&fs, inp.index, &t, &Unperturbed, &cfg).unwrap();
            match (direct, &out.verdict) {
                (RunVerdict::Halted { output, steps }, SimulationVerdict::Halted { point, height }) if steps >= 1 => {
                    assert_eq!(*height as u64, steps);
                    assert_eq!((point.q, &point.r, &point.s), (output.q, &output.r, &output.s));
                }
                (RunVerdict::Halted { steps: 0, .. }, SimulationVerdict::Halted { height, .. }) => {
                    assert_eq!(*height, 1)
                }
                (d, v) => panic!("{d:?} vs {v:?}"),
            }
        }
    }

    #[test]
    fn bounded_verdicts_match() {
        let cases = [(presets::bounce(), -2, 3), (presets::runaway(), -2, 3), (presets::countdown(), -1, 1)];
        for (m, lo, hi) in cases {
            let fs = FieldSpec::compile(&m, &FieldParams { inputs: 3, heights: 12, ..Default::default() }).unwrap();
            let cfg = IntegratorConfig { window: 10.0, ..Default::default() };
            let tb = TapeBoundedSpec::new(m.clone(), lo, hi).unwrap();
            for inp in fs.inputs() {
                let direct = run_bounded(&tb, &inp.config, 1000).unwrap();
                let out = simulate_bounded(&fs, inp.index, &tb, &Unperturbed, &cfg).unwrap();
                let ok = match (&direct, &out.verdict) {
                    (BoundedVerdict::Halted { steps, .. }, SimulationVerdict::Halted { height, .. }) => {
                        *steps == *height as u64
                    }
                    (BoundedVerdict::OutOfMemory { steps }, SimulationVerdict::OutOfMemory { height }) => {
                        *steps == *height as u64
                    }
                    (BoundedVerdict::Loop { .. }, SimulationVerdict::Loop) => true,
                    _ => false,
                };
                assert!(ok, "{} input {}: {direct:?} vs {}", m.name, inp.index, out.verdict);
            }
        }
    }
}
