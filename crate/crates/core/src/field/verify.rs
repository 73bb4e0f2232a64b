use super::FieldSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub samples: usize,
    /// `max |X - ∇_h f| / |X|` over the sampled points.
    pub max_rel_err: f64,
    /// `max |∂x X_y - ∂y X_x|` by central differences.
    pub max_curl: f64,
}

fn sample_point(fs: &FieldSpec, rng: &mut ChaCha8Rng, rho_max: f64) -> Option<(f64, f64)> {
    let band = rng.gen_range(0..fs.bands());
    let chart = &fs.charts()[band];
    let top = chart.family().budget() as f64 - 0.1;
    let u = rng.gen_range(0.0..top.max(0.05));
    let rho = rng.gen_range(-rho_max..rho_max);
    chart.param_to_plane(u, rho).ok()
}

/// Compare the Cartesian field with central differences of the Cartesian
/// potential at random points with `|ρ| <= ρ₀/2`.
pub fn verify_gradient(fs: &FieldSpec, samples: usize, seed: u64) -> GradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = GradientReport { samples: 0, max_rel_err: 0.0, max_curl: 0.0 };
    let h = 1e-6;
    let hc = 1e-5;
    while rep.samples < samples {
        let Some((x, y)) = sample_point(fs, &mut rng, 0.5 * fs.rho0()) else { continue };
        let f = |dx: f64, dy: f64| fs.potential_plane(x + dx, y + dy);
        let (Some(fxp), Some(fxm), Some(fyp), Some(fym)) = (f(h, 0.0), f(-h, 0.0), f(0.0, h), f(0.0, -h)) else {
            continue;
        };
        let grad = [(fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)];
        let x_field = fs.field_eval_plane(x, y);
        let norm = x_field[0].hypot(x_field[1]);
        let err = (x_field[0] - grad[0]).hypot(x_field[1] - grad[1]) / norm;
        let g = |dx: f64, dy: f64| fs.field_eval_plane(x + dx, y + dy);
        let curl = (g(hc, 0.0)[1] - g(-hc, 0.0)[1]) / (2.0 * hc) - (g(0.0, hc)[0] - g(0.0, -hc)[0]) / (2.0 * hc);
        rep.max_rel_err = rep.max_rel_err.max(err);
        rep.max_curl = rep.max_curl.max(curl.abs());
        rep.samples += 1;
    }
    rep
}

/// Minimum of `X·∂y` at random points with `|ρ| < ρ₀` (the transversality strip).
pub fn transversality_min(fs: &FieldSpec, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a11);
    let mut best = f64::INFINITY;
    let mut taken = 0;
    while taken < samples {
        let Some((x, y)) = sample_point(fs, &mut rng, fs.rho0()) else { continue };
        best = best.min(fs.field_eval_plane(x, y)[1]);
        taken += 1;
    }
    best
}
