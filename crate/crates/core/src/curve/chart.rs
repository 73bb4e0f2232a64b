use super::family::CurveFamily;
use crate::error::Error;

/// Half-width of every band chart.
pub const CHART_HALF_WIDTH: f64 = 1.0 / 16.0;

/// Unit tangent and left normal of the curve at parameter `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub lambda: f64,
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
    /// `ds/du = sqrt(1 + λ'^2)`.
    pub speed: f64,
}

/// Tubular coordinates `(s, ρ)` around one curve: `(x, y) = γ(s) + ρ N(s)`.
#[derive(Clone, Debug)]
pub struct BandChart {
    family: CurveFamily,
    rho0: f64,
}

impl BandChart {
    pub fn new(family: CurveFamily, rho0: f64) -> Result<Self, Error> {
        if !(rho0 > 0.0 && rho0 < CHART_HALF_WIDTH) {
            return Err(Error::Config(format!("rho0 must lie in (0, 1/16), got {rho0}")));
        }
        Ok(BandChart { family, rho0 })
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn frame(&self, u: f64) -> Result<Frame, Error> {
        let (lambda, d1, d2) = self.family.lambda_eval(u)?;
        let speed = (1.0 + d1 * d1).sqrt();
        Ok(Frame {
            lambda,
            tangent: [d1 / speed, 1.0 / speed],
            normal: [-1.0 / speed, d1 / speed],
            kappa: -d2 / (speed * speed * speed),
            speed,
        })
    }

    /// Plane point of the chart point with curve parameter `u`.
    pub fn param_to_plane(&self, u: f64, rho: f64) -> Result<(f64, f64), Error> {
        let f = self.frame(u)?;
        Ok((f.lambda + rho * f.normal[0], u + rho * f.normal[1]))
    }

    pub fn chart_to_plane(&self, s: f64, rho: f64) -> Result<(f64, f64), Error> {
        if rho.abs() >= CHART_HALF_WIDTH {
            return Err(Error::Config(format!("|rho| = {} is outside the chart", rho.abs())));
        }
        self.param_to_plane(self.family.param_at_arc(s)?, rho)
    }

    /// Foot-point parameter and signed distance of a plane point.
    pub fn plane_to_param(&self, x: f64, y: f64) -> Result<(f64, f64), Error> {
        let outside = || Error::OutsideChart { band: self.family.band(), x, y };
        let g = |u: f64| -> Result<f64, Error> {
            let (lam, d1, _) = self.family.lambda_eval(u)?;
            Ok((x - lam) * d1 + (y - u))
        };
        let w = CHART_HALF_WIDTH * 1.001;
        let (mut lo, mut hi) = (y - w, (y + w).min(self.family.u_max()));
        if hi <= lo {
            return Err(outside());
        }
        let (glo, ghi) = (g(lo).map_err(|_| outside())?, g(hi).map_err(|_| outside())?);
        if glo < 0.0 || ghi > 0.0 {
            return Err(outside());
        }
        let mut u = y.clamp(lo, hi);
        for _ in 0..200 {
            let (lam, d1, d2) = self.family.lambda_eval(u)?;
            let val = (x - lam) * d1 + (y - u);
            if val == 0.0 {
                break;
            }
            if val > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let deriv = -d1 * d1 + (x - lam) * d2 - 1.0;
            let next = u - val / deriv;
            let stepped = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if (stepped - u).abs() < 1e-16 * (1.0 + u.abs()) || hi - lo < 1e-15 {
                u = stepped;
                break;
            }
            u = stepped;
        }
        let f = self.frame(u)?;
        let rho = (x - f.lambda) * f.normal[0] + (y - u) * f.normal[1];
        if rho.abs() >= CHART_HALF_WIDTH {
            return Err(outside());
        }
        Ok((u, rho))
    }

    pub fn plane_to_chart(&self, x: f64, y: f64) -> Result<(f64, f64), Error> {
        let (u, rho) = self.plane_to_param(x, y)?;
        Ok((self.family.arc_length(u)?, rho))
    }
}
