//! Compactification: a damped planar field pushed to the sphere by inverse
//! stereographic projection, and the time-δ map of the damped flow.

use crate::error::Error;
use crate::field::FieldSpec;
use crate::flow::{
    classify_crossing, Classification, FlowDriver, FlowState, HaltingSetSpec, IntegratorConfig, SimulationVerdict,
    Unperturbed,
};
use crate::logmag::SignedLog;

/// `G(x, y) = exp(-(e^{r/R} - 1))`: `G(0) = 1`, decreasing in `r`, faster
/// than any exponential at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingProfile {
    pub radius: f64,
}

impl Default for DampingProfile {
    fn default() -> Self {
        DampingProfile { radius: 64.0 }
    }
}

impl DampingProfile {
    pub fn new(radius: f64) -> Result<Self, Error> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config("damping radius must be positive".into()));
        }
        Ok(DampingProfile { radius })
    }

    pub fn factor(&self, x: f64, y: f64) -> f64 {
        (-(x.hypot(y) / self.radius).exp_m1()).exp()
    }
}

/// `φ(x, y) = (2x, 2y, x² + y² - 1)/(1 + x² + y²)`; infinity goes to `N = (0, 0, 1)`.
pub fn stereographic(x: f64, y: f64) -> [f64; 3] {
    let s = 1.0 + x * x + y * y;
    [2.0 * x / s, 2.0 * y / s, (s - 2.0) / s]
}

/// Inverse of [`stereographic`]; `None` at the north pole.
pub fn inverse_stereographic(p: [f64; 3]) -> Option<(f64, f64)> {
    let d = 1.0 - p[2];
    (d > 1e-300).then(|| (p[0] / d, p[1] / d))
}

/// `dφ_{(x,y)} v`.
pub fn pushforward(x: f64, y: f64, v: [f64; 2]) -> [f64; 3] {
    let s = 1.0 + x * x + y * y;
    let s2 = s * s;
    [
        ((2.0 * s - 4.0 * x * x) * v[0] - 4.0 * x * y * v[1]) / s2,
        (-4.0 * x * y * v[0] + (2.0 * s - 4.0 * y * y) * v[1]) / s2,
        (4.0 * x * v[0] + 4.0 * y * v[1]) / s2,
    ]
}

/// `Y = φ_*(G X)` on the unit sphere, zero at the north pole.
pub struct SphereField<'a> {
    pub fs: &'a FieldSpec,
    pub damping: DampingProfile,
}

pub fn damp_and_push(fs: &FieldSpec, damping: DampingProfile) -> SphereField<'_> {
    SphereField { fs, damping }
}

impl SphereField<'_> {
    pub fn eval(&self, p: [f64; 3]) -> [f64; 3] {
        let Some((x, y)) = inverse_stereographic(p) else {
            return [0.0; 3];
        };
        let g = self.damping.factor(x, y);
        if g == 0.0 {
            return [0.0; 3];
        }
        let v = self.fs.field_eval_plane(x, y);
        pushforward(x, y, [g * v[0], g * v[1]])
    }

    /// `G(r) · 2/(1 + r²)`, an upper bound of `|Y|/|X|` at planar radius `r`.
    pub fn envelope(&self, r: f64) -> f64 {
        self.damping.factor(r, 0.0) * 2.0 / (1.0 + r * r)
    }
}

/// `δ₀ = ε/(32Λ)`.
pub fn delta_threshold(eps: f64, lambda: f64) -> f64 {
    eps / (32.0 * lambda)
}

/// One iterate of the time-δ map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iterate {
    pub n: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Iterate {
    pub fn on_sphere(&self) -> [f64; 3] {
        stereographic(self.x, self.y)
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteOutcome {
    pub verdict: SimulationVerdict,
    pub hit: bool,
    /// Iterates inside the `ε/2`-neighbourhood of each line `y = l`, `l = 0..=L_max`.
    pub band_hits: Vec<usize>,
    /// Highest line whose `ε/2`-neighbourhood the orbit entered or fully crossed.
    pub reached: usize,
    pub iterates: Vec<Iterate>,
}

impl DiscreteOutcome {
    /// Every line `y = l` with `l ≤ reached` holds at least one iterate.
    pub fn no_band_skipped(&self) -> bool {
        self.band_hits.iter().take(self.reached + 1).all(|&c| c > 0)
    }
}

/// Iterate the time-δ map of `G X` from `p^i_0` and classify iterates in the
/// `ε/2`-neighbourhoods of the lines `y = l` against the boxes.
pub fn discrete_orbit_verdict(
    fs: &FieldSpec,
    band: usize,
    target: &HaltingSetSpec,
    delta: f64,
    damping: DampingProfile,
    cfg: &IntegratorConfig,
) -> Result<DiscreteOutcome, Error> {
    let d0 = delta_threshold(fs.eps(), fs.lambda());
    if !(delta > 0.0 && delta < d0) {
        return Err(Error::Config(format!("δ = {delta} must lie in (0, δ₀ = {d0})")));
    }
    let g = move |x: f64, y: f64| damping.factor(x, y);
    let drv = FlowDriver::new(fs, band, &Unperturbed, cfg)?.with_damping(&g);
    let lmax = cfg.lmax;
    if lmax > drv.chart().family().budget() {
        return Err(Error::Config(format!("L_max = {lmax} exceeds the curve budget")));
    }
    let halt = fs.machine().halt();
    let half = 0.5 * fs.eps();
    let mut out = DiscreteOutcome {
        verdict: SimulationVerdict::Unresolved { budget: lmax },
        hit: false,
        band_hits: vec![0; lmax + 1],
        reached: 0,
        iterates: Vec::new(),
    };
    let mut st = FlowState::new(0.0, SignedLog::ZERO);
    let mut n = 0usize;
    loop {
        let l = st.u.round();
        if l >= 0.0 && (st.u - l).abs() < half && (l as usize) <= lmax {
            let l = l as usize;
            out.band_hits[l] += 1;
            out.reached = out.reached.max(l);
            if l >= 1 {
                if let Classification::InsideBox(p) = classify_crossing(fs, band, l, st.rho)? {
                    if p.q == halt {
                        out.hit = target.contains(&p, halt);
                        out.verdict = SimulationVerdict::Halted { point: p, height: l };
                        return Ok(out);
                    }
                }
            }
        }
        if st.u > lmax as f64 + half {
            return Ok(out);
        }
        let passed = (st.u - half).floor();
        if passed >= 0.0 {
            out.reached = out.reached.max((passed as usize).min(lmax));
        }
        if cfg.record_trajectory {
            let (x, y) = drv.position(&st)?;
            out.iterates.push(Iterate { n, t: st.t, x, y });
        }
        st = time_delta_map(&drv, &st, delta)?;
        n += 1;
    }
}

/// Flow the damped field for time `delta` with RK4 substeps of at most `max_du` in `u`.
pub fn time_delta_map(drv: &FlowDriver<'_>, st: &FlowState, delta: f64) -> Result<FlowState, Error> {
    let du = drv.rates(st.u, st.rho.to_f64())?.du;
    let subs = ((delta * du / drv.config().max_du).ceil() as usize).max(1);
    let h = delta / subs as f64;
    let mut s = *st;
    for _ in 0..subs {
        s = drv.rk_step(&s, h)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lambda0, FieldParams};
    use crate::flow::{simulate_input, Advance};
    use crate::machine::presets;

    #[test]
    fn round_trip() {
        for (x, y) in [(0.0, 0.0), (1.5, -2.0), (30.0, 7.0), (-1e-3, 40.0)] {
            let (a, b) = inverse_stereographic(stereographic(x, y)).unwrap();
            assert!((a - x).abs() <= 1e-12 * (1.0 + x.abs()) && (b - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        assert!(inverse_stereographic([0.0, 0.0, 1.0]).is_none());
        let p = stereographic(3.0, 4.0);
        assert!((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_is_differential() {
        let (x, y, v) = (0.7, -1.3, [0.4, 0.9]);
        let h = 1e-6;
        let a = stereographic(x + h * v[0], y + h * v[1]);
        let b = stereographic(x - h * v[0], y - h * v[1]);
        let w = pushforward(x, y, v);
        for k in 0..3 {
            assert!(((a[k] - b[k]) / (2.0 * h) - w[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_value() {
        let d0 = delta_threshold(0.01, 0.5 * lambda0());
        assert!((d0 - 0.01 / (16.0 * lambda0())).abs() < 1e-12);
        assert!((d0 - 0.5555).abs() < 1e-3);
        assert!((delta_threshold(0.02, 0.5 * lambda0()) - 2.0 * d0).abs() < 1e-12);
    }

    #[test]
    fn sphere_field_zero_at_pole_and_outside() {
        let fs =
            FieldSpec::compile(&presets::countdown(), &FieldParams { inputs: 2, heights: 3, ..Default::default() })
                .unwrap();
        let y = damp_and_push(&fs, DampingProfile::default());
        assert_eq!(y.eval([0.0, 0.0, 1.0]), [0.0; 3]);
        assert_eq!(y.eval(stereographic(1.5, 1.0)), [0.0; 3]);
        let x0 = fs.chart(0).unwrap().family().anchor_x(0);
        assert!(y.eval(stereographic(x0, 0.004)) != [0.0; 3]);
    }

    #[test]
    fn damping_keeps_point_set() {
        let fs = FieldSpec::compile(&presets::bounce(), &FieldParams { inputs: 2, heights: 4, ..Default::default() })
            .unwrap();
        let cfg = IntegratorConfig { lmax: 4, ..Default::default() };
        let damp = DampingProfile::new(3.0).unwrap();
        let g = move |x: f64, y: f64| damp.factor(x, y);
        let plain = FlowDriver::new(&fs, 1, &Unperturbed, &cfg).unwrap();
        let damped = FlowDriver::new(&fs, 1, &Unperturbed, &cfg).unwrap().with_damping(&g);
        let start = FlowState::new(0.0, SignedLog::from_f64(2e-3));
        let (mut a, mut b) = (start, start);
        for l in 1..=4 {
            let Advance::Reached(na) = plain.advance_to(a, l as f64, None, None).unwrap() else { panic!() };
            let Advance::Reached(nb) = damped.advance_to(b, l as f64, None, None).unwrap() else { panic!() };
            assert!(nb.t > na.t);
            let rel = (na.rho.ln_abs() - nb.rho.ln_abs()).abs() / na.rho.ln_abs().abs();
            assert!(rel < 1e-6, "height {l}: {} vs {}", na.rho, nb.rho);
            a = na;
            b = nb;
        }
    }

    #[test]
    fn discrete_matches_continuous_small() {
        let m = presets::countdown();
        let fs = FieldSpec::compile(&m, &FieldParams { inputs: 3, heights: 4, ..Default::default() }).unwrap();
        let cfg = IntegratorConfig { lmax: 4, ..Default::default() };
        let delta = 0.5 * delta_threshold(fs.eps(), fs.lambda());
        for inp in fs.inputs() {
            let t = HaltingSetSpec::around(&inp.config, 1);
            let cont = simulate_input(&fs, inp.index, &t, &Unperturbed, &cfg).unwrap();
            let disc = discrete_orbit_verdict(&fs, inp.index, &t, delta, DampingProfile::default(), &cfg).unwrap();
            assert_eq!(cont.hit, disc.hit);
            assert_eq!(cont.verdict, disc.verdict);
            assert!(disc.no_band_skipped(), "{:?}", disc.band_hits);
        }
        assert!(discrete_orbit_verdict(
            &fs,
            0,
            &HaltingSetSpec::new(vec![0]).unwrap(),
            1.0,
            DampingProfile::default(),
            &cfg
        )
        .is_err());
    }
}
