use super::poly::Poly2;
use crate::error::Error;
use crate::field::{ErrorSchedule, FieldSpec};
use crate::flow::Perturbation;
use crate::logmag::LogMagnitude;
use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::FromPrimitive;

/// Closed box `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, Error> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Config("empty fitting window".into()));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    /// The union of boxes `K^i_l` for `i, l ≤ n`.
    pub fn covering_boxes(n: usize) -> Self {
        Window { x0: 0.0, x1: 2.0 * n as f64 + 1.0, y0: -0.25, y1: n as f64 + 1.25 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn to_unit(&self, x: f64, y: f64) -> (f64, f64) {
        ((2.0 * x - self.x0 - self.x1) / (self.x1 - self.x0), (2.0 * y - self.y0 - self.y1) / (self.y1 - self.y0))
    }

    fn scale(&self) -> (f64, f64) {
        (2.0 / (self.x1 - self.x0), 2.0 / (self.y1 - self.y0))
    }

    pub fn grid(&self, n: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let m = n.max(2) - 1;
        (0..n).flat_map(move |a| {
            (0..n).map(move |b| {
                (
                    self.x0 + (self.x1 - self.x0) * a as f64 / m as f64,
                    self.y0 + (self.y1 - self.y0) * b as f64 / m as f64,
                )
            })
        })
    }
}

// P_0..P_n and their derivatives at t
fn legendre(n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![1.0, t];
    let mut d = vec![0.0, 1.0];
    for k in 1..n {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0));
        d.push(d[k - 1] + (2.0 * kf + 1.0) * p[k]);
    }
    p.truncate(n + 1);
    d.truncate(n + 1);
    (p, d)
}

fn basis(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|a| (0..=degree - a).map(move |b| (a, b))).filter(|&ab| ab != (0, 0)).collect()
}

/// Least-squares polynomial potential `F = c + Σ c_{ab} P_a(ξ) P_b(η)` on a window.
#[derive(Clone, Debug)]
pub struct WindowFit {
    pub window: Window,
    pub degree: usize,
    coeffs: Vec<((usize, usize), f64)>,
    constant: f64,
    /// Root-mean-square gradient residual on the fitting grid.
    pub rms_residual: f64,
    /// Sup of `|∇F - X|` on the verification grid.
    pub grad_sup_err: f64,
    /// Sup of `|F - f|` where the reference potential is defined.
    pub value_sup_err: f64,
    /// Sup of `|X|` on the verification grid.
    pub field_sup: f64,
}

impl WindowFit {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (xi, eta) = self.window.to_unit(x, y);
        let (px, _) = legendre(self.degree, xi);
        let (py, _) = legendre(self.degree, eta);
        self.constant + self.coeffs.iter().map(|&((a, b), c)| c * px[a] * py[b]).sum::<f64>()
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (xi, eta) = self.window.to_unit(x, y);
        let (sx, sy) = self.window.scale();
        let (px, dpx) = legendre(self.degree, xi);
        let (py, dpy) = legendre(self.degree, eta);
        let mut g = [0.0; 2];
        for &((a, b), c) in &self.coeffs {
            g[0] += c * dpx[a] * py[b] * sx;
            g[1] += c * px[a] * dpy[b] * sy;
        }
        g
    }

    /// Exact monomial form with the fitted coefficients read as exact rationals.
    pub fn to_poly(&self) -> Poly2 {
        let r = |v: f64| BigRational::from_f64(v).expect("finite coefficient");
        let (sx, sy) = self.window.scale();
        let xi = Poly2::x()
            .scale(&r(sx))
            .add(&Poly2::constant(r(-(self.window.x0 + self.window.x1) / (self.window.x1 - self.window.x0))));
        let eta = Poly2::y()
            .scale(&r(sy))
            .add(&Poly2::constant(r(-(self.window.y0 + self.window.y1) / (self.window.y1 - self.window.y0))));
        let leg = |t: &Poly2| -> Vec<Poly2> {
            let mut p = vec![Poly2::constant(r(1.0)), t.clone()];
            for k in 1..self.degree {
                let kf = k as i64;
                let next = t
                    .mul(&p[k])
                    .scale(&super::poly::rat(2 * kf + 1, kf + 1))
                    .sub(&p[k - 1].scale(&super::poly::rat(kf, kf + 1)));
                p.push(next);
            }
            p
        };
        let (lx, ly) = (leg(&xi), leg(&eta));
        let mut f = Poly2::constant(r(self.constant));
        for &((a, b), c) in &self.coeffs {
            f = f.add(&lx[a].mul(&ly[b]).scale(&r(c)));
        }
        f
    }
}

/// Fit a potential to gradient samples `g(x, y) = (X, f)` on an `n × n` grid
/// and verify on a `(2n + 1)²` grid. `f` may be absent (only the gradient is fitted).
pub fn fit_gradient<G>(window: Window, degree: usize, n: usize, g: G) -> Result<WindowFit, Error>
where
    G: Fn(f64, f64) -> ([f64; 2], Option<f64>),
{
    if degree < 1 || n < degree + 2 {
        return Err(Error::Config("fit needs degree >= 1 and a grid larger than the degree".into()));
    }
    let cols = basis(degree);
    let pts: Vec<(f64, f64)> = window.grid(n).collect();
    let (sx, sy) = window.scale();
    let mut a = DMatrix::<f64>::zeros(2 * pts.len(), cols.len());
    let mut rhs = DVector::<f64>::zeros(2 * pts.len());
    for (r, &(x, y)) in pts.iter().enumerate() {
        let (xi, eta) = window.to_unit(x, y);
        let (px, dpx) = legendre(degree, xi);
        let (py, dpy) = legendre(degree, eta);
        for (c, &(ia, ib)) in cols.iter().enumerate() {
            a[(2 * r, c)] = dpx[ia] * py[ib] * sx;
            a[(2 * r + 1, c)] = px[ia] * dpy[ib] * sy;
        }
        let (v, _) = g(x, y);
        rhs[2 * r] = v[0];
        rhs[2 * r + 1] = v[1];
    }
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).map_err(|e| Error::Config(format!("least squares failed: {e}")))?;
    let resid = &a * &sol - &rhs;
    let rms_residual = (resid.norm_squared() / pts.len() as f64).sqrt();
    let mut fit = WindowFit {
        window,
        degree,
        coeffs: cols.iter().copied().zip(sol.iter().copied()).collect(),
        constant: 0.0,
        rms_residual,
        grad_sup_err: 0.0,
        value_sup_err: 0.0,
        field_sup: 0.0,
    };
    let check: Vec<(f64, f64)> = window.grid(2 * n + 1).collect();
    let mut shifts = Vec::new();
    for &(x, y) in &check {
        let (v, f) = g(x, y);
        if let Some(f) = f {
            shifts.push(f - fit.eval(x, y));
        }
        let gr = fit.gradient(x, y);
        fit.grad_sup_err = fit.grad_sup_err.max((gr[0] - v[0]).hypot(gr[1] - v[1]));
        fit.field_sup = fit.field_sup.max(v[0].hypot(v[1]));
    }
    if !shifts.is_empty() {
        fit.constant = shifts.iter().sum::<f64>() / shifts.len() as f64;
        fit.value_sup_err = shifts.iter().map(|s| (s - fit.constant).abs()).fold(0.0, f64::max);
    }
    Ok(fit)
}

#[derive(Clone, Debug)]
pub struct WindowFitReport {
    pub fit: WindowFit,
    /// Smallest scheduled threshold `ε^i_l` over boxes meeting the window.
    pub threshold: Option<LogMagnitude>,
    /// `grad_sup_err < threshold`.
    pub certified: bool,
}

/// Fit the Cartesian potential of `fs` on `window`. The reference value is
/// used only where the cutoff is 1 (`|ρ| ≤ ext_width/2`).
pub fn fit_window_polynomial(
    fs: &FieldSpec,
    window: Window,
    degree: usize,
    n: usize,
    schedule: Option<&ErrorSchedule>,
) -> Result<WindowFitReport, Error> {
    let fit = fit_gradient(window, degree, n, |x, y| {
        let v = fs.field_eval_plane(x, y);
        let f = fs
            .locate(x, y)
            .filter(|&(_, _, rho)| rho.abs() <= 0.5 * fs.ext_width())
            .and_then(|_| fs.potential_plane(x, y));
        (v, f)
    })?;
    let threshold = schedule.and_then(|s| {
        let mut out: Option<LogMagnitude> = None;
        for i in 0..fs.bands() {
            let (bx0, bx1) = (2.0 * i as f64, 2.0 * i as f64 + 1.0);
            if bx1 < window.x0 || bx0 > window.x1 {
                continue;
            }
            for l in 0..=s.budget() {
                let (by0, by1) = (l as f64 - 0.25, l as f64 + 1.25);
                if by1 < window.y0 || by0 > window.y1 {
                    continue;
                }
                if let Some(t) = s.threshold(i, l) {
                    out = Some(out.map_or(t, |o| o.min(t)));
                }
            }
        }
        out
    });
    let certified =
        threshold.is_some_and(|t| fit.grad_sup_err == 0.0 || LogMagnitude::from_value(fit.grad_sup_err) < t);
    Ok(WindowFitReport { fit, threshold, certified })
}

/// `∇F - X` on the window (zero outside), as a perturbation of the planar field.
pub struct FitDifference<'a> {
    pub fs: &'a FieldSpec,
    pub fit: &'a WindowFit,
}

impl Perturbation for FitDifference<'_> {
    fn eval(&self, x: f64, y: f64) -> Option<(LogMagnitude, [f64; 2])> {
        if !self.fit.window.contains(x, y) {
            return None;
        }
        let g = self.fit.gradient(x, y);
        let v = self.fs.field_eval_plane(x, y);
        let d = [g[0] - v[0], g[1] - v[1]];
        let n = d[0].hypot(d[1]);
        (n > 0.0).then(|| (LogMagnitude::from_value(n), [d[0] / n, d[1] / n]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_potential_is_exact() {
        // f = x²y + 3x - y³/3
        let w = Window::new(-1.0, 2.0, 0.0, 1.5).unwrap();
        let f = |x: f64, y: f64| x * x * y + 3.0 * x - y * y * y / 3.0;
        let fit = fit_gradient(w, 3, 12, |x, y| ([2.0 * x * y + 3.0, x * x - y * y], Some(f(x, y)))).unwrap();
        assert!(fit.grad_sup_err < 1e-11, "{}", fit.grad_sup_err);
        assert!(fit.value_sup_err < 1e-11);
        let p = fit.to_poly();
        for (x, y) in [(0.3, 0.2), (-0.7, 1.1), (1.9, 0.05)] {
            assert!((p.eval_f64(x, y) - f(x, y)).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_non_increasing_in_degree() {
        let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let g = |x: f64, y: f64| ([(3.0 * x).cos() * y, (3.0 * x).sin() / 3.0 + y.exp()], None);
        let mut prev = f64::INFINITY;
        for d in 1..8 {
            let fit = fit_gradient(w, d, 20, g).unwrap();
            assert!(fit.rms_residual <= prev * (1.0 + 1e-9));
            prev = fit.rms_residual;
        }
    }

    #[test]
    fn legendre_values() {
        let (p, d) = legendre(3, 0.5);
        assert!((p[2] - (-0.125)).abs() < 1e-15);
        assert!((p[3] - (-0.4375)).abs() < 1e-15);
        assert!((d[3] - 0.375).abs() < 1e-15);
    }
}
