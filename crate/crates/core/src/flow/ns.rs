/// Time budget of the Navier–Stokes reparametrisation `τ(t) = M(1 - e^{-νλ²t})/(νλ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsBudget {
    pub lambda: f64,
    pub nu: f64,
    /// Smallest integer `M` with `M/(νλ²) > T_max`.
    pub m: u64,
}

impl NsBudget {
    /// Largest reachable Euler time `M/(νλ²)`.
    pub fn horizon(&self) -> f64 {
        self.m as f64 / self.rate()
    }

    fn rate(&self) -> f64 {
        self.nu * self.lambda * self.lambda
    }

    /// Euler time reached at Navier–Stokes time `t`.
    pub fn warp(&self, t: f64) -> f64 {
        let k = self.rate();
        -(self.m as f64) * (-k * t).exp_m1() / k
    }

    /// Navier–Stokes time at which Euler time `tau` is reached, if it is below the horizon.
    pub fn unwarp(&self, tau: f64) -> Option<f64> {
        let k = self.rate();
        let x = tau * k / self.m as f64;
        (x < 1.0).then(|| -(-x).ln_1p() / k)
    }
}

pub fn ns_time_budget(lambda: f64, nu: f64, t_max: f64) -> Option<NsBudget> {
    if !(lambda > 0.0 && nu > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return None;
    }
    let k = nu * lambda * lambda;
    let m = (t_max * k).floor() as u64 + 1;
    Some(NsBudget { lambda, nu, m })
}
