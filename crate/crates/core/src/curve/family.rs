use super::bump::BumpProfile;
use crate::error::Error;
use crate::machine::{trace, Configuration, EncodedPoint, MachineSpec};
use crate::quad;
use std::sync::Arc;

// Composite panels per unit of the segment parameter.
const ARC_PANELS: f64 = 64.0;

/// The curve `u ↦ (λ(u), u)` through the anchors `(x_l, l)` of one band.
#[derive(Clone, Debug)]
pub struct CurveFamily {
    band: usize,
    xs: Vec<f64>,
    configs: Vec<Configuration>,
    points: Vec<EncodedPoint>,
    profile: Arc<BumpProfile>,
    s_anchor: Vec<f64>,
    arc_err: f64,
}

impl CurveFamily {
    /// Curve for input `c` in band `band`, with anchors `Δ^l(c)` for `l = 0..=heights`.
    pub fn build(
        machine: &MachineSpec,
        c: &Configuration,
        band: usize,
        heights: usize,
        profile: Arc<BumpProfile>,
    ) -> Result<Self, Error> {
        let configs = trace(machine, c, heights);
        let points: Vec<EncodedPoint> = configs.iter().map(EncodedPoint::of).collect();
        let xs = points.iter().map(|p| p.center(band)).collect();
        Self::assemble(band, xs, configs, points, profile)
    }

    /// Curve through arbitrary anchor abscissae (no machine attached).
    pub fn from_anchors(band: usize, xs: Vec<f64>, profile: Arc<BumpProfile>) -> Result<Self, Error> {
        if xs.is_empty() {
            return Err(Error::Config("a curve needs at least one anchor".into()));
        }
        Self::assemble(band, xs, Vec::new(), Vec::new(), profile)
    }

    fn assemble(
        band: usize,
        xs: Vec<f64>,
        configs: Vec<Configuration>,
        points: Vec<EncodedPoint>,
        profile: Arc<BumpProfile>,
    ) -> Result<Self, Error> {
        let mut cf = CurveFamily { band, xs, configs, points, profile, s_anchor: vec![0.0], arc_err: 0.0 };
        for l in 0..cf.xs.len() - 1 {
            let dx = cf.xs[l + 1] - cf.xs[l];
            let gap = cf.segment_arc(dx, 1.0);
            if dx != 0.0 {
                let p = cf.profile.clone();
                let g = |t: f64| (1.0 + (dx * p.beta_prime(t)).powi(2)).sqrt();
                let (v, e) = quad::integrate(g, p.eps(), 1.0 - p.eps(), 1e-12)?;
                let err = (v + 2.0 * p.eps() - gap).abs() + e;
                cf.arc_err = cf.arc_err.max(err);
            }
            let last = *cf.s_anchor.last().expect("non-empty");
            cf.s_anchor.push(last + gap);
        }
        Ok(cf)
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// Highest stored anchor index.
    pub fn budget(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn profile(&self) -> &Arc<BumpProfile> {
        &self.profile
    }

    pub fn anchor_x(&self, l: usize) -> f64 {
        self.xs[l]
    }

    pub fn anchors(&self) -> &[f64] {
        &self.xs
    }

    /// Configuration `Δ^l(c_i)` (absent for synthetic curves).
    pub fn config(&self, l: usize) -> Option<&Configuration> {
        self.configs.get(l)
    }

    pub fn point(&self, l: usize) -> Option<&EncodedPoint> {
        self.points.get(l)
    }

    /// Largest parameter the curve is defined up to.
    pub fn u_max(&self) -> f64 {
        self.budget() as f64 + self.profile.eps()
    }

    // (segment index, local parameter τ in [0, 1)) or the top vertical piece
    fn locate(&self, u: f64) -> Result<(usize, f64), Error> {
        if u > self.u_max() {
            return Err(Error::BudgetExhausted { u, budget: self.budget() });
        }
        if u < 0.0 {
            return Ok((0, 0.0));
        }
        let l = (u.floor() as usize).min(self.budget());
        Ok((l, u - l as f64))
    }

    /// `(λ, λ', λ'')` at curve parameter `u`.
    pub fn lambda_eval(&self, u: f64) -> Result<(f64, f64, f64), Error> {
        let (l, tau) = self.locate(u)?;
        let eps = self.profile.eps();
        if l == self.budget() || tau <= eps {
            return Ok((self.xs[l], 0.0, 0.0));
        }
        let dx = self.xs[l + 1] - self.xs[l];
        if tau >= 1.0 - eps {
            return Ok((self.xs[l + 1], 0.0, 0.0));
        }
        let p = &self.profile;
        Ok((self.xs[l] + dx * p.beta(tau), dx * p.beta_prime(tau), dx * p.beta_second(tau)))
    }

    /// `λ'` alone (no β table lookup).
    pub fn slope(&self, u: f64) -> Result<f64, Error> {
        let (l, tau) = self.locate(u)?;
        if l == self.budget() {
            return Ok(0.0);
        }
        Ok((self.xs[l + 1] - self.xs[l]) * self.profile.beta_prime(tau))
    }

    /// `(λ', λ'')` without the β table.
    pub fn derivatives(&self, u: f64) -> Result<(f64, f64), Error> {
        let (l, tau) = self.locate(u)?;
        if l == self.budget() {
            return Ok((0.0, 0.0));
        }
        let dx = self.xs[l + 1] - self.xs[l];
        Ok((dx * self.profile.beta_prime(tau), dx * self.profile.beta_second(tau)))
    }

    /// Signed curvature `-λ''(1 + λ'^2)^{-3/2}`.
    pub fn curvature(&self, u: f64) -> Result<f64, Error> {
        let (d1, d2) = self.derivatives(u)?;
        Ok(-d2 * (1.0 + d1 * d1).powf(-1.5))
    }

    /// Arc-length positions `s_l` of the anchors.
    pub fn arc_length_heights(&self) -> &[f64] {
        &self.s_anchor
    }

    pub fn gap(&self, l: usize) -> f64 {
        self.s_anchor[l + 1] - self.s_anchor[l]
    }

    pub fn max_gap(&self) -> f64 {
        (0..self.budget()).map(|l| self.gap(l)).fold(1.0, f64::max)
    }

    /// Difference between the composite and adaptive arc-length rules.
    pub fn arc_error(&self) -> f64 {
        self.arc_err
    }

    // arc length of segment with jump dx from τ = 0 to τ
    fn segment_arc(&self, dx: f64, tau: f64) -> f64 {
        let eps = self.profile.eps();
        if dx == 0.0 || tau <= eps {
            return tau;
        }
        let top = tau.min(1.0 - eps);
        let n = (((top - eps) * ARC_PANELS).ceil() as usize).max(1);
        let p = &self.profile;
        let inner = quad::composite(|t| (1.0 + (dx * p.beta_prime(t)).powi(2)).sqrt(), eps, top, n);
        eps + inner + (tau - top)
    }

    /// Arc length from `p_0` to `γ(u)`; negative below the start.
    pub fn arc_length(&self, u: f64) -> Result<f64, Error> {
        if u < 0.0 {
            return Ok(u);
        }
        let (l, tau) = self.locate(u)?;
        if l == self.budget() {
            return Ok(self.s_anchor[l] + tau);
        }
        Ok(self.s_anchor[l] + self.segment_arc(self.xs[l + 1] - self.xs[l], tau))
    }

    /// Inverse of [`arc_length`](Self::arc_length).
    pub fn param_at_arc(&self, s: f64) -> Result<f64, Error> {
        if s < 0.0 {
            return Ok(s);
        }
        let l = match self.s_anchor.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(k) => return Ok(k as f64),
            Err(k) => k - 1,
        };
        let sigma = s - self.s_anchor[l];
        if l == self.budget() {
            let u = l as f64 + sigma;
            if u > self.u_max() {
                return Err(Error::BudgetExhausted { u, budget: self.budget() });
            }
            return Ok(u);
        }
        let eps = self.profile.eps();
        let gap = self.gap(l);
        if sigma <= eps {
            return Ok(l as f64 + sigma);
        }
        if sigma >= gap - eps {
            return Ok(l as f64 + 1.0 - (gap - sigma));
        }
        let dx = self.xs[l + 1] - self.xs[l];
        let (mut lo, mut hi) = (eps, 1.0 - eps);
        let mut tau = eps + (sigma - eps) / (gap - 2.0 * eps) * (1.0 - 2.0 * eps);
        for _ in 0..100 {
            let f = self.segment_arc(dx, tau) - sigma;
            if f.abs() < 1e-15 {
                break;
            }
            if f > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let d = (1.0 + (dx * self.profile.beta_prime(tau)).powi(2)).sqrt();
            let next = tau - f / d;
            tau = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(l as f64 + tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::presets;

    fn profile() -> Arc<BumpProfile> {
        Arc::new(BumpProfile::new(0.01, 1e-12).unwrap())
    }

    #[test]
    fn anchors_hit_and_vertical_pieces() {
        let cf = CurveFamily::from_anchors(1, vec![2.5, 2.25, 2.4], profile()).unwrap();
        for l in 0..3 {
            assert_eq!(cf.lambda_eval(l as f64).unwrap(), (cf.anchor_x(l), 0.0, 0.0));
        }
        assert_eq!(cf.lambda_eval(-3.0).unwrap().0, 2.5);
        assert_eq!(cf.lambda_eval(1.009).unwrap().0, 2.25);
        let (mid, _, d2) = cf.lambda_eval(0.5).unwrap();
        assert!((mid - 2.375).abs() < 1e-14);
        assert!(d2.abs() < 1e-12);
        assert!(cf.lambda_eval(2.02).is_err());
    }

    #[test]
    fn halted_segment_has_unit_gap() {
        let m = presets::instant();
        let cf = CurveFamily::build(&m, &Configuration::blank(1), 0, 3, profile()).unwrap();
        assert_eq!(cf.arc_length_heights(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn arc_length_inverse() {
        let cf = CurveFamily::from_anchors(0, vec![0.5, 0.25, 0.1, 0.1], profile()).unwrap();
        for k in 0..300 {
            let u = k as f64 * 3.0 / 300.0;
            let s = cf.arc_length(u).unwrap();
            let back = cf.param_at_arc(s).unwrap();
            assert!((back - u).abs() < 1e-11, "{u} -> {s} -> {back}");
        }
        assert!(cf.arc_error() < 1e-10);
    }

    #[test]
    fn arc_length_continuous_at_anchors() {
        let cf = CurveFamily::from_anchors(0, vec![0.5, 0.25, 0.4], profile()).unwrap();
        let s1 = cf.arc_length_heights()[1];
        assert!((cf.arc_length(1.0 - 1e-12).unwrap() - s1).abs() < 1e-11);
        assert_eq!(cf.arc_length(1.0).unwrap(), s1);
    }
}
