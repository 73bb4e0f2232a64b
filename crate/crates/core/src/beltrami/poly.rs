use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Bivariate polynomial `Σ c_{ij} x^i y^j` with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: BigRational) -> Self {
        let mut p = Poly2::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, rat(1, 1))
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, rat(1, 1))
    }

    /// From `(i, j, c)` triples with integer-fraction coefficients.
    pub fn from_terms(terms: &[(u32, u32, i64, i64)]) -> Self {
        let mut p = Poly2::zero();
        for &(i, j, n, d) in terms {
            p.add_term(i, j, rat(n, d));
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut p = self.clone();
        for (&(i, j), c) in &other.terms {
            p.add_term(i, j, c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly2 {
        self.scale(&rat(-1, 1))
    }

    pub fn scale(&self, k: &BigRational) -> Poly2 {
        if k.is_zero() {
            return Poly2::zero();
        }
        Poly2 { terms: self.terms.iter().map(|(&m, c)| (m, c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut p = Poly2::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                p.add_term(i + k, j + l, a * b);
            }
        }
        p
    }

    pub fn dx(&self) -> Poly2 {
        let mut p = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                p.add_term(i - 1, j, c * BigInt::from(i));
            }
        }
        p
    }

    pub fn dy(&self) -> Poly2 {
        let mut p = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                p.add_term(i, j - 1, c * BigInt::from(j));
            }
        }
        p
    }

    pub fn laplacian(&self) -> Poly2 {
        self.dx().dx().add(&self.dy().dy())
    }

    /// Coefficients rounded to `f64` for grid evaluation.
    pub fn to_f64(&self) -> Poly2F {
        Poly2F { terms: self.terms.iter().map(|(&(i, j), c)| (i, j, c.to_f64().unwrap_or(f64::NAN))).collect() }
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.to_f64().eval(x, y)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "x^{i}")?;
            }
            if j > 0 {
                write!(f, "y^{j}")?;
            }
        }
        Ok(())
    }
}

/// Floating copy of a [`Poly2`].
#[derive(Clone, Debug, Default)]
pub struct Poly2F {
    terms: Vec<(u32, u32, f64)>,
}

impl Poly2F {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derivatives_and_laplacian() {
        // x^3 y + 2 x y^2
        let p = Poly2::from_terms(&[(3, 1, 1, 1), (1, 2, 2, 1)]);
        assert_eq!(p.dx(), Poly2::from_terms(&[(2, 1, 3, 1), (0, 2, 2, 1)]));
        assert_eq!(p.dy(), Poly2::from_terms(&[(3, 0, 1, 1), (1, 1, 4, 1)]));
        assert_eq!(p.laplacian(), Poly2::from_terms(&[(1, 1, 6, 1), (1, 0, 4, 1)]));
        assert_eq!(p.degree(), Some(4));
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Poly2::x().sub(&Poly2::x());
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    fn small_poly() -> impl Strategy<Value = Poly2> {
        prop::collection::vec((0u32..4, 0u32..4, -9i64..10, 1i64..5), 0..6).prop_map(|t| Poly2::from_terms(&t))
    }

    proptest! {
        #[test]
        fn product_rule(a in small_poly(), b in small_poly()) {
            let lhs = a.mul(&b).dx();
            let rhs = a.dx().mul(&b).add(&a.mul(&b.dx()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn eval_is_ring_map(a in small_poly(), b in small_poly(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let v = a.mul(&b).eval_f64(x, y);
            let w = a.eval_f64(x, y) * b.eval_f64(x, y);
            prop_assert!((v - w).abs() <= 1e-9 * (1.0 + w.abs()));
        }
    }
}
