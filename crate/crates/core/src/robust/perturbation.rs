use crate::field::ErrorSchedule;
use crate::flow::Perturbation;
use crate::logmag::LogMagnitude;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bumps per slot along `x`.
pub const X_BUMPS: usize = 5;
// bump k covers [2i - 1/4 + 0.3k, 2i + 0.05 + 0.3k]
const X_START: f64 = -0.25;
const X_PITCH: f64 = 0.3;

/// `exp(1 - 1/(1 - t²))` on `(-1, 1)`: peak 1 at `t = 0`.
fn unit_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// A finite bump sum: on band `i` and slot `l` (supported on
/// `y ∈ [l - 1/4, l + 3/4]`) the field is `e^{cap} w(y) Σ_k w_k(x) a_k`
/// with disjoint `w_k` and `|a_k| ≤ 1`, so `|P| ≤ e^{cap}` pointwise.
#[derive(Clone, Debug)]
pub struct PerturbationSpec {
    seed: u64,
    caps: Vec<Vec<Option<LogMagnitude>>>,
    amps: Vec<Vec<[[f64; 2]; X_BUMPS]>>,
}

impl PerturbationSpec {
    pub fn zero() -> Self {
        PerturbationSpec { seed: 0, caps: Vec::new(), amps: Vec::new() }
    }

    /// Caps `ε₀ ε^i_l` from the schedule, amplitudes uniform in `[-1, 1]²` clipped to the unit disc.
    pub fn sample(schedule: &ErrorSchedule, bands: usize, seed: u64) -> Self {
        let caps = (0..bands).map(|i| (0..=schedule.budget()).map(|l| schedule.cap(i, l)).collect()).collect();
        Self::with_caps(caps, seed)
    }

    /// Arbitrary caps (`caps[i][l]`), e.g. oversized ones for negative tests.
    pub fn with_caps(caps: Vec<Vec<Option<LogMagnitude>>>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = caps
            .iter()
            .map(|row| {
                row.iter()
                    .map(|_| {
                        let mut a = [[0.0; 2]; X_BUMPS];
                        for v in a.iter_mut() {
                            *v = [rng.gen_range(-1.0f64..=1.0), rng.gen_range(-1.0f64..=1.0)];
                            let n = v[0].hypot(v[1]);
                            if n > 1.0 {
                                *v = [v[0] / n, v[1] / n];
                            }
                        }
                        a
                    })
                    .collect()
            })
            .collect();
        PerturbationSpec { seed, caps, amps }
    }

    /// Same cap on every slot of `bands × (heights + 1)`.
    pub fn uniform(cap: LogMagnitude, bands: usize, heights: usize, seed: u64) -> Self {
        Self::with_caps(vec![vec![Some(cap); heights + 1]; bands], seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cap(&self, i: usize, l: usize) -> Option<LogMagnitude> {
        *self.caps.get(i)?.get(l)?
    }

    fn locate(&self, x: f64, y: f64) -> Option<(usize, usize, f64, f64)> {
        let i = ((x - X_START) / 2.0).floor();
        let l = (y + 0.25).floor();
        if i < 0.0 || l < 0.0 {
            return None;
        }
        Some((i as usize, l as usize, x - X_START - 2.0 * i, y + 0.25 - l))
    }

    /// Shape vector `w(y) Σ_k w_k(x) a_k` (norm at most 1).
    pub fn shape(&self, x: f64, y: f64) -> Option<(usize, usize, [f64; 2])> {
        let (i, l, dx, dy) = self.locate(x, y)?;
        let amps = self.amps.get(i)?.get(l)?;
        let k = (dx / X_PITCH).floor();
        if k < 0.0 || k as usize >= X_BUMPS {
            return None;
        }
        let tx = (dx - X_PITCH * (k + 0.5)) / (0.5 * X_PITCH);
        let w = unit_bump(tx) * unit_bump(2.0 * dy - 1.0);
        if w == 0.0 {
            return None;
        }
        let a = amps[k as usize];
        Some((i, l, [w * a[0], w * a[1]]))
    }

    /// Sampled `sup |P|` on `K^i_l = [2i, 2i + 1] × [l - 1/4, l + 5/4]`, in log form.
    pub fn sup_on_box(&self, i: usize, l: usize, samples: usize, seed: u64) -> Option<LogMagnitude> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<LogMagnitude> = None;
        for _ in 0..samples {
            let x = 2.0 * i as f64 + rng.gen_range(0.0..=1.0);
            let y = l as f64 - 0.25 + rng.gen_range(0.0..=1.5);
            if let Some((scale, v)) = self.eval(x, y) {
                let m = scale.scale_ln(v[0].hypot(v[1]).ln());
                best = Some(best.map_or(m, |b| b.max(m)));
            }
        }
        best
    }
}

impl Perturbation for PerturbationSpec {
    fn eval(&self, x: f64, y: f64) -> Option<(LogMagnitude, [f64; 2])> {
        let (i, l, v) = self.shape(x, y)?;
        let cap = self.cap(i, l)?;
        (v != [0.0, 0.0]).then_some((cap, v))
    }

    fn is_zero(&self) -> bool {
        self.caps.iter().all(|row| row.iter().all(Option::is_none))
    }
}
