use super::{gamma0, FieldSpec};
use crate::curve::interval_bound_log;
use crate::logmag::LogMagnitude;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sampled `max ‖DX‖` (operator norm, central differences) over the box
/// `[0, 1] × [-1/4, 5/4]` of band 0.
pub fn measure_dx_bound(fs: &FieldSpec, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = &fs.charts()[0];
    let top = (chart.family().u_max() - 0.07).min(1.25);
    let h = 1e-6;
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let u = rng.gen_range(-0.25..top);
        let rho = rng.gen_range(-1.0..1.0) * fs.ext_width();
        let Ok((x, y)) = chart.param_to_plane(u, rho) else { continue };
        let fx = |dx: f64, dy: f64| fs.field_eval_plane(x + dx, y + dy);
        let (xp, xm, yp, ym) = (fx(h, 0.0), fx(-h, 0.0), fx(0.0, h), fx(0.0, -h));
        let j = [
            [(xp[0] - xm[0]) / (2.0 * h), (yp[0] - ym[0]) / (2.0 * h)],
            [(xp[1] - xm[1]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)],
        ];
        best = best.max(op_norm(j));
    }
    best
}

// Largest singular value of a 2x2 matrix.
fn op_norm(j: [[f64; 2]; 2]) -> f64 {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    (0.5 * (tr + disc)).sqrt()
}

/// Thresholds `ε^i_l = (M/(e^{Mτ} - 1)) min{ε/2, A_{i,l+1}/8}` for `i + l <= budget`.
#[derive(Clone, Debug)]
pub struct ErrorSchedule {
    m_bound: f64,
    tau: f64,
    eps0: f64,
    eps: f64,
    states: u32,
    budget: usize,
    factor: f64,
    table: Vec<Vec<LogMagnitude>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    /// Largest grid value of `C` for which `ln ε^i_l <= ln C - e^{C r}` holds on every box.
    pub fitted_c: Option<f64>,
    /// Worst margin `ln C - e^{C r} - ln ε^i_l` at the fitted `C`.
    pub min_margin: f64,
}

impl ErrorSchedule {
    /// Build with `M` measured on the field and `τ = (max gap + 1)/Γ₀`.
    pub fn for_field(fs: &FieldSpec, budget: usize, eps0: f64) -> Self {
        let m = measure_dx_bound(fs, 2000, 11).max(1e-3);
        let max_gap = fs.charts().iter().map(|c| c.family().max_gap()).fold(1.0, f64::max);
        let tau = (max_gap + 1.0) / gamma0();
        Self::new(m, tau, eps0, fs.eps(), fs.machine().states(), budget)
    }

    pub fn new(m_bound: f64, tau: f64, eps0: f64, eps: f64, states: u32, budget: usize) -> Self {
        assert!(m_bound > 0.0 && tau > 0.0 && eps0 > 0.0 && budget >= 1);
        let mt = m_bound * tau;
        // ln(M/(e^{Mτ} - 1)) without overflow
        let factor = m_bound.ln() - mt - (-(-mt).exp()).ln_1p();
        let half_eps = LogMagnitude::from_value(eps / 2.0);
        let table = (0..=budget)
            .map(|i| {
                (0..=budget - i)
                    .map(|l| {
                        let a = interval_bound_log(states, i, l + 1).scale_ln(-8f64.ln());
                        half_eps.min(a).scale_ln(factor)
                    })
                    .collect()
            })
            .collect();
        ErrorSchedule { m_bound, tau, eps0, eps, states, budget, factor, table }
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// `ln(M/(e^{Mτ} - 1))`.
    pub fn factor_ln(&self) -> f64 {
        self.factor
    }

    /// `ε^i_l`, or `None` outside the table.
    pub fn threshold(&self, i: usize, l: usize) -> Option<LogMagnitude> {
        self.table.get(i)?.get(l).copied()
    }

    /// Perturbation cap `ε₀ ε^i_l`.
    pub fn cap(&self, i: usize, l: usize) -> Option<LogMagnitude> {
        Some(self.threshold(i, l)?.scale_ln(self.eps0.ln()))
    }

    /// Smallest threshold over the boxes `i < bands`, `l <= heights`.
    pub fn min_threshold(&self, bands: usize, heights: usize) -> Option<LogMagnitude> {
        let mut out: Option<LogMagnitude> = None;
        for i in 0..bands {
            for l in 0..=heights {
                let t = self.threshold(i, l)?;
                out = Some(out.map_or(t, |o| o.min(t)));
            }
        }
        out
    }

    /// Check the double-exponential decay shape `ε <= C e^{-e^{C r}}` with `r`
    /// the farthest distance of box `K^i_l` from the origin.
    pub fn envelope_check(&self) -> EnvelopeReport {
        let margin_at = |c: f64| -> f64 {
            let mut worst = f64::INFINITY;
            for (i, row) in self.table.iter().enumerate() {
                for (l, t) in row.iter().enumerate() {
                    let r = ((2.0 * i as f64 + 1.0).powi(2) + (l as f64 + 1.25).powi(2)).sqrt();
                    let bound = LogMagnitude::plain(c.ln() - (c * r).exp());
                    worst = worst.min(bound.ln_minus(t));
                }
            }
            worst
        };
        let mut fitted = None;
        for k in (1..=80).rev() {
            let c = k as f64 * 0.05;
            let m = margin_at(c);
            if m >= 0.0 {
                fitted = Some((c, m));
                break;
            }
        }
        match fitted {
            Some((c, m)) => EnvelopeReport { fitted_c: Some(c), min_margin: m },
            None => EnvelopeReport { fitted_c: None, min_margin: margin_at(0.05) },
        }
    }

    pub fn states(&self) -> u32 {
        self.states
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}
