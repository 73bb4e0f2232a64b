//! The planar gradient field `X = ∇f` with `f = Λs - ρ²/2` on each band.

mod schedule;
mod verify;

pub use schedule::{measure_dx_bound, EnvelopeReport, ErrorSchedule};
pub use verify::{transversality_min, verify_gradient, GradientReport};

use crate::curve::{BandChart, BumpProfile, CurveFamily, CHART_HALF_WIDTH, LN_15};
use crate::error::Error;
use crate::machine::{enumerate_inputs, InputPoint, MachineSpec};
use rayon::prelude::*;
use std::f64::consts::LN_2;
use std::sync::Arc;

/// `Λ₀ = 1/(320 ln 15 + 32 ln 2)`.
pub fn lambda0() -> f64 {
    1.0 / (320.0 * LN_15 + 32.0 * LN_2)
}

/// `Γ₀ = 4Λ₀/31`, a lower bound on the tangential speed.
pub fn gamma0() -> f64 {
    4.0 * lambda0() / 31.0
}

/// Smooth step: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn cutoff(t: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = psi(1.0 - t);
    a / (a + psi(t - 0.5))
}

#[derive(Clone, Debug)]
pub struct FieldParams {
    /// Λ as a fraction of Λ₀.
    pub lambda_frac: f64,
    pub eps: f64,
    /// Number of enumerated inputs (bands).
    pub inputs: usize,
    /// Anchors per curve: heights `0..=heights`.
    pub heights: usize,
    /// Width of the plane-side cutoff around each curve.
    pub ext_width: f64,
    /// Transversality width; defaults to `Λ/(2 + max β')`.
    pub rho0: Option<f64>,
    pub quad_tol: f64,
    /// Seed for sampling `c₀`.
    pub seed: u64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            lambda_frac: 0.5,
            eps: 0.01,
            inputs: 5,
            heights: 21,
            ext_width: 0.05,
            rho0: None,
            quad_tol: 1e-12,
            seed: 0,
        }
    }
}

/// Compiled field of one machine: Λ, ε, ρ₀, c₀ and one chart per input.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    machine: MachineSpec,
    lambda: f64,
    eps: f64,
    rho0: f64,
    c0: f64,
    ext_width: f64,
    profile: Arc<BumpProfile>,
    inputs: Vec<InputPoint>,
    charts: Vec<BandChart>,
}

impl FieldSpec {
    pub fn compile(machine: &MachineSpec, params: &FieldParams) -> Result<Self, Error> {
        if !(params.lambda_frac > 0.0 && params.lambda_frac < 1.0) {
            return Err(Error::Config(format!("Λ must lie strictly below Λ₀, got fraction {}", params.lambda_frac)));
        }
        if params.inputs == 0 || params.heights == 0 {
            return Err(Error::Config("need at least one input and one height".into()));
        }
        if !(params.ext_width > 0.0 && params.ext_width < CHART_HALF_WIDTH) {
            return Err(Error::Config("extension width must lie in (0, 1/16)".into()));
        }
        let lambda = params.lambda_frac * lambda0();
        let profile = Arc::new(BumpProfile::new(params.eps, params.quad_tol)?);
        let rho0 = params.rho0.unwrap_or(lambda / (2.0 + profile.max_beta_prime()));
        let inputs = enumerate_inputs(machine, params.inputs);
        let charts = inputs
            .par_iter()
            .map(|inp| {
                let cf = CurveFamily::build(machine, &inp.config, inp.index, params.heights, profile.clone())?;
                BandChart::new(cf, rho0)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let mut fs = FieldSpec {
            machine: machine.clone(),
            lambda,
            eps: params.eps,
            rho0,
            c0: 0.0,
            ext_width: params.ext_width,
            profile,
            inputs,
            charts,
        };
        let observed = transversality_min(&fs, 200 * fs.charts.len(), params.seed);
        if observed <= 0.0 {
            return Err(Error::Config(format!("transversality fails: min X·∂y = {observed}")));
        }
        fs.c0 = 0.5 * observed;
        Ok(fs)
    }

    /// Copy with a different Λ and no `Λ < Λ₀` check (negative tests only).
    pub fn with_lambda_unchecked(&self, lambda: f64) -> FieldSpec {
        FieldSpec { lambda, ..self.clone() }
    }

    pub fn machine(&self) -> &MachineSpec {
        &self.machine
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// Measured transversality bound (half the sampled minimum of `X·∂y`).
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn ext_width(&self) -> f64 {
        self.ext_width
    }

    pub fn profile(&self) -> &Arc<BumpProfile> {
        &self.profile
    }

    pub fn inputs(&self) -> &[InputPoint] {
        &self.inputs
    }

    pub fn bands(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, band: usize) -> Result<&BandChart, Error> {
        self.charts.get(band).ok_or(Error::UnknownBand(band))
    }

    pub fn charts(&self) -> &[BandChart] {
        &self.charts
    }

    /// Chart components `(X_s, X_ρ) = (Λ/(1 - κρ), -ρ)` at arc length `s`.
    pub fn field_eval_chart(&self, band: usize, s: f64, rho: f64) -> Result<(f64, f64), Error> {
        let u = self.chart(band)?.family().param_at_arc(s)?;
        self.field_at_param(band, u, rho)
    }

    /// Same as [`field_eval_chart`](Self::field_eval_chart) with the curve parameter given.
    pub fn field_at_param(&self, band: usize, u: f64, rho: f64) -> Result<(f64, f64), Error> {
        if rho.abs() >= CHART_HALF_WIDTH {
            return Err(Error::Config(format!("|rho| = {} is outside the chart", rho.abs())));
        }
        let kappa = self.chart(band)?.family().curvature(u)?;
        Ok((self.lambda / (1.0 - kappa * rho), -rho))
    }

    /// `f = Λs - ρ²/2`.
    pub fn potential_eval(&self, band: usize, s: f64, rho: f64) -> Result<f64, Error> {
        self.chart(band)?;
        if rho.abs() >= CHART_HALF_WIDTH {
            return Err(Error::Config(format!("|rho| = {} is outside the chart", rho.abs())));
        }
        Ok(self.lambda * s - 0.5 * rho * rho)
    }

    /// Band whose chart could contain abscissa `x`.
    pub fn band_of(&self, x: f64) -> Option<usize> {
        let i = ((x + CHART_HALF_WIDTH) / 2.0).floor();
        if i < 0.0 {
            return None;
        }
        let i = i as usize;
        (i < self.charts.len() && x <= 2.0 * i as f64 + 1.0 + CHART_HALF_WIDTH).then_some(i)
    }

    /// Chart coordinates `(band, u, ρ)` of a plane point, if it lies in a band.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, f64, f64)> {
        let i = self.band_of(x)?;
        let (u, rho) = self.charts[i].plane_to_param(x, y).ok()?;
        Some((i, u, rho))
    }

    /// Cartesian field: the Euclidean gradient `ΛT/(1 - κρ) - ρN` of `f`,
    /// cut off smoothly at `|ρ| = ext_width`; zero outside every band.
    pub fn field_eval_plane(&self, x: f64, y: f64) -> [f64; 2] {
        let Some((i, u, rho)) = self.locate(x, y) else {
            return [0.0, 0.0];
        };
        let chi = cutoff(rho.abs() / self.ext_width);
        if chi == 0.0 {
            return [0.0, 0.0];
        }
        let Ok(f) = self.charts[i].frame(u) else {
            return [0.0, 0.0];
        };
        let a = self.lambda / (1.0 - f.kappa * rho);
        [chi * (a * f.tangent[0] - rho * f.normal[0]), chi * (a * f.tangent[1] - rho * f.normal[1])]
    }

    /// `f(x, y) = f_i(chart(x, y))` inside a band chart.
    pub fn potential_plane(&self, x: f64, y: f64) -> Option<f64> {
        let (i, u, rho) = self.locate(x, y)?;
        let s = self.charts[i].family().arc_length(u).ok()?;
        Some(self.lambda * s - 0.5 * rho * rho)
    }
}
