use crate::error::Error;
use crate::quad;

/// `e^{-1/t} e^{-1/(1-t)}` on `(0, 1)`, zero elsewhere.
pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / t - 1.0 / (1.0 - t)).exp()
    }
}

/// `b(t) (1/t^2 - 1/(1-t)^2)`, the derivative of [`bump`].
pub fn bump_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        bump(t) * (1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t)))
    }
}

const PANELS: usize = 256;

/// Normalized antiderivative of the bump between `eps` and `1 - eps`.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    eps: f64,
    z: f64,
    z_full: f64,
    z_full_err: f64,
    sup_slope: f64,
    h: f64,
    cum: Vec<f64>,
    err: f64,
}

impl BumpProfile {
    pub fn new(eps: f64, tol: f64) -> Result<Self, Error> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::Config(format!("cut eps must lie in (0, 1/4), got {eps}")));
        }
        if !(tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        let h = (1.0 - 2.0 * eps) / PANELS as f64;
        let mut cum = Vec::with_capacity(PANELS + 1);
        cum.push(0.0);
        let mut err = 0.0;
        for k in 0..PANELS {
            let a = eps + h * k as f64;
            let (v, e) = quad::integrate(bump, a, a + h, tol / PANELS as f64 * 1e-3)?;
            err += e;
            cum.push(cum[k] + v);
        }
        let z = cum[PANELS];
        let (z_full, z_full_err) = quad::integrate(bump, 0.0, 1.0, tol * 1e-3)?;
        Ok(BumpProfile { eps, z, z_full, z_full_err, sup_slope: sup_of_slope(), h, cum, err: err / z })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `∫_ε^{1-ε} b`.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// `∫_0^1 b` and its error estimate.
    pub fn z_full(&self) -> (f64, f64) {
        (self.z_full, self.z_full_err)
    }

    /// `sup_{(0,1)} |b(t)(1/t^2 - 1/(1-t)^2)|`.
    pub fn sup_slope(&self) -> f64 {
        self.sup_slope
    }

    /// Bound on the tabulation error of β.
    pub fn error_bound(&self) -> f64 {
        self.err
    }

    /// `β(σ)`, clamped to 0 below `ε` and 1 above `1 - ε`.
    pub fn beta(&self, sigma: f64) -> f64 {
        if sigma <= self.eps {
            return 0.0;
        }
        if sigma >= 1.0 - self.eps {
            return 1.0;
        }
        let k = (((sigma - self.eps) / self.h) as usize).min(PANELS - 1);
        let a = self.eps + self.h * k as f64;
        let part = quad::gk15(&bump, a, sigma).0;
        (self.cum[k] + part) / self.z
    }

    /// `β'(σ)` on the open segment, 0 outside.
    pub fn beta_prime(&self, sigma: f64) -> f64 {
        if sigma <= self.eps || sigma >= 1.0 - self.eps {
            0.0
        } else {
            bump(sigma) / self.z
        }
    }

    pub fn beta_second(&self, sigma: f64) -> f64 {
        if sigma <= self.eps || sigma >= 1.0 - self.eps {
            0.0
        } else {
            bump_prime(sigma) / self.z
        }
    }

    /// `max β'`, attained at 1/2.
    pub fn max_beta_prime(&self) -> f64 {
        bump(0.5) / self.z
    }

    /// `max |β''|`.
    pub fn max_beta_second(&self) -> f64 {
        self.sup_slope / self.z
    }
}

fn slope_abs(t: f64) -> f64 {
    bump_prime(t).abs()
}

// Grid scan on (0, 1/2) then golden-section refinement; the expression is
// symmetric about 1/2.
fn sup_of_slope() -> f64 {
    let n = 10_000;
    let (mut best_t, mut best) = (0.0, 0.0);
    for k in 1..n {
        let t = 0.5 * k as f64 / n as f64;
        let v = slope_abs(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_t - 0.5 / n as f64, best_t + 0.5 / n as f64);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if slope_abs(c) > slope_abs(d) {
            b = d;
        } else {
            a = c;
        }
    }
    slope_abs(0.5 * (a + b)).max(best)
}
