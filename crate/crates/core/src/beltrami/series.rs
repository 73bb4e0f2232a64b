use super::poly::{Poly2, Poly2F};
use crate::error::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use std::fmt::Write as _;

pub type PolyVec = [Poly2; 3];

fn zero_vec() -> PolyVec {
    [Poly2::zero(), Poly2::zero(), Poly2::zero()]
}

/// A field `Σ_k a_k(x, y) z^k` with polynomial coefficient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesField3D {
    lambda: BigRational,
    coeffs: Vec<PolyVec>,
}

pub fn lambda_exact(lambda: f64) -> Result<BigRational, Error> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Config("the Beltrami eigenvalue must be a finite nonzero number".into()));
    }
    BigRational::from_f64(lambda).ok_or_else(|| Error::Config(format!("λ = {lambda} is not representable")))
}

/// `a₀ = (F_x, F_y, 0)`, `a₁ = (λF_y, -λF_x, -ΔF)`.
pub fn cauchy_data(f: &Poly2, lambda: &BigRational) -> Result<(PolyVec, PolyVec), Error> {
    if lambda.is_zero() {
        return Err(Error::Config("λ = 0 is not allowed".into()));
    }
    let (fx, fy) = (f.dx(), f.dy());
    let a0 = [fx.clone(), fy.clone(), Poly2::zero()];
    let a1 = [fy.scale(lambda), fx.scale(lambda).neg(), f.laplacian().neg()];
    Ok((a0, a1))
}

// -(λ² a + Δa)/((k+1)(k+2))
fn recurrence(a: &PolyVec, lambda2: &BigRational, k: usize) -> PolyVec {
    let d = BigRational::from_integer(BigInt::from((k + 1) * (k + 2)));
    let factor = -BigRational::from_integer(BigInt::from(1)) / d;
    a.clone().map(|c| c.scale(lambda2).add(&c.laplacian()).scale(&factor))
}

/// Fill `a_2..a_K` from the Cauchy data by matching powers of `z` in
/// `∂²v/∂z² = -λ²v - Δ_{xy} v`.
pub fn extend_series(data: &(PolyVec, PolyVec), lambda: &BigRational, order: usize) -> Result<SeriesField3D, Error> {
    if order < 2 {
        return Err(Error::Config("truncation order must be at least 2".into()));
    }
    let lambda2 = lambda * lambda;
    let mut coeffs = vec![data.0.clone(), data.1.clone()];
    for k in 0..=order - 2 {
        let next = recurrence(&coeffs[k], &lambda2, k);
        coeffs.push(next);
    }
    Ok(SeriesField3D { lambda: lambda.clone(), coeffs })
}

// ∂_z of a series: coefficient k is (k+1) a_{k+1}
fn dz(c: &[PolyVec], k: usize, comp: usize) -> Poly2 {
    c.get(k + 1).map(|a| a[comp].scale(&BigRational::from_integer(BigInt::from(k + 1)))).unwrap_or_default()
}

/// Coefficient `k` of `curl` of a series (needs `a_{k+1}`).
fn curl_coeff(c: &[PolyVec], k: usize) -> PolyVec {
    let a = &c[k];
    [a[2].dy().sub(&dz(c, k, 1)), dz(c, k, 0).sub(&a[2].dx()), a[1].dx().sub(&a[0].dy())]
}

/// `u = (curl v + λv)/(2λ)`, truncated at order `K - 1`.
pub fn assemble_beltrami(v: &SeriesField3D) -> SeriesField3D {
    let two_lambda = &v.lambda * BigInt::from(2);
    let inv = BigRational::from_integer(BigInt::from(1)) / two_lambda;
    let coeffs = (0..v.order())
        .map(|k| {
            let cu = curl_coeff(&v.coeffs, k);
            let mut out = zero_vec();
            for (o, (c, a)) in out.iter_mut().zip(cu.iter().zip(&v.coeffs[k])) {
                *o = c.add(&a.scale(&v.lambda)).scale(&inv);
            }
            out
        })
        .collect();
    SeriesField3D { lambda: v.lambda.clone(), coeffs }
}

/// First nonzero coefficient `(k, component, polynomial)` of a residual series.
pub type Offending = (usize, usize, Poly2);

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// Orders checked: `0..=checked_through`.
    pub checked_through: usize,
    pub curl: Option<Offending>,
    pub div: Option<Offending>,
    /// `u|_{z=0} = (F_x, F_y, 0)` exactly.
    pub plane_ok: bool,
}

impl ResidualReport {
    pub fn ok(&self) -> bool {
        self.curl.is_none() && self.div.is_none() && self.plane_ok
    }
}

/// Exact `curl u - λu` and `div v` through order `K - 2`, and the plane restriction.
pub fn residuals(u: &SeriesField3D, v: &SeriesField3D, f: &Poly2) -> ResidualReport {
    let top = v.order().saturating_sub(2);
    let mut curl = None;
    let mut div = None;
    for k in 0..=top {
        if curl.is_none() && k + 1 < u.coeffs.len() {
            let cu = curl_coeff(&u.coeffs, k);
            for comp in 0..3 {
                let r = cu[comp].sub(&u.coeffs[k][comp].scale(&u.lambda));
                if !r.is_zero() {
                    curl = Some((k, comp, r));
                    break;
                }
            }
        }
        if div.is_none() {
            let a = &v.coeffs[k];
            let r = a[0].dx().add(&a[1].dy()).add(&dz(&v.coeffs, k, 2));
            if !r.is_zero() {
                div = Some((k, 0, r));
            }
        }
    }
    let u0 = &u.coeffs[0];
    let plane_ok = u0[0] == f.dx() && u0[1] == f.dy() && u0[2].is_zero();
    ResidualReport { checked_through: top, curl, div, plane_ok }
}

impl SeriesField3D {
    /// Highest stored power of `z`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn coeff(&self, k: usize) -> Option<&PolyVec> {
        self.coeffs.get(k)
    }

    /// First `(k, component)` where the stored recursion fails.
    pub fn recursion_violation(&self) -> Option<(usize, usize)> {
        let lambda2 = &self.lambda * &self.lambda;
        for k in 0..self.coeffs.len().saturating_sub(2) {
            let expect = recurrence(&self.coeffs[k], &lambda2, k);
            for comp in 0..3 {
                if expect[comp] != self.coeffs[k + 2][comp] {
                    return Some((k + 2, comp));
                }
            }
        }
        None
    }

    /// Largest total degree over all coefficients.
    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.iter().flat_map(|a| a.iter().filter_map(Poly2::degree)).max()
    }

    pub fn evaluator(&self) -> SeriesEval {
        SeriesEval { coeffs: self.coeffs.iter().map(|a| a.clone().map(|p| p.to_f64())).collect() }
    }

    /// `k comp i j numerator denominator`, one line per monomial.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, a) in self.coeffs.iter().enumerate() {
            for (comp, p) in a.iter().enumerate() {
                for (&(i, j), c) in p.terms() {
                    let _ = writeln!(out, "{k} {comp} {i} {j} {} {}", c.numer(), c.denom());
                }
            }
        }
        out
    }
}

/// Floating evaluator of a series field.
#[derive(Clone, Debug)]
pub struct SeriesEval {
    coeffs: Vec<[Poly2F; 3]>,
}

impl SeriesEval {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in self.coeffs.iter().rev() {
            for c in 0..3 {
                out[c] = out[c] * z + a[c].eval(x, y);
            }
        }
        out
    }

    /// Rows `x,y,z,ux,uy,uz` on a uniform `n³` grid of `[-r, r]³`.
    pub fn grid(&self, r: f64, n: usize) -> Vec<[f64; 6]> {
        let pts: Vec<f64> = (0..n).map(|k| -r + 2.0 * r * k as f64 / (n.max(2) - 1) as f64).collect();
        let mut rows = Vec::with_capacity(n * n * n);
        for &x in &pts {
            for &y in &pts {
                for &z in &pts {
                    let u = self.eval(x, y, z);
                    rows.push([x, y, z, u[0], u[1], u[2]]);
                }
            }
        }
        rows
    }
}
