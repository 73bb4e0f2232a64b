//! Levelled logarithms for magnitudes that underflow `f64`.
//!
//! A [`LogMagnitude`] stores `ln v = offset - coeff * 10^level`. The level
//! stays symbolic so that values like `15^{-10^{30}}` compare correctly.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMagnitude {
    offset: f64,
    coeff: f64,
    level: u32,
}

impl LogMagnitude {
    pub const ONE: LogMagnitude = LogMagnitude { offset: 0.0, coeff: 0.0, level: 0 };

    /// The value `e^ln`.
    pub fn plain(ln: f64) -> Self {
        LogMagnitude { offset: ln, coeff: 0.0, level: 0 }
    }

    /// The value `exp(offset - coeff * 10^level)`; `coeff` must be non-negative.
    pub fn levelled(offset: f64, coeff: f64, level: u32) -> Self {
        assert!(coeff >= 0.0 && coeff.is_finite(), "coefficient must be finite and >= 0");
        if coeff == 0.0 {
            return Self::plain(offset);
        }
        LogMagnitude { offset, coeff, level }
    }

    /// Magnitude of a positive finite float.
    pub fn from_value(v: f64) -> Self {
        assert!(v > 0.0 && v.is_finite(), "from_value needs a positive finite number");
        Self::plain(v.ln())
    }

    /// `exp(-big)` for a large positive `big`, choosing a level that keeps
    /// the coefficient in `[1, 10)`.
    pub fn from_neg_ln(big: f64) -> Self {
        if big < 1e12 {
            return Self::plain(-big);
        }
        let level = big.log10().floor() as u32;
        Self::levelled(0.0, big / 10f64.powi(level as i32), level)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_plain(&self) -> bool {
        self.coeff == 0.0
    }

    /// `ln v` as a float; `-inf` once the levelled term overflows.
    pub fn ln(&self) -> f64 {
        if self.coeff == 0.0 {
            self.offset
        } else {
            self.offset - self.coeff * 10f64.powi(self.level as i32)
        }
    }

    /// `v` as a float (0 on underflow).
    pub fn value(&self) -> f64 {
        self.ln().exp()
    }

    /// Multiply by `e^d`.
    pub fn scale_ln(self, d: f64) -> Self {
        LogMagnitude { offset: self.offset + d, ..self }
    }

    /// Product of two magnitudes.
    pub fn mul(self, other: Self) -> Self {
        if self.coeff == 0.0 {
            return other.scale_ln(self.offset);
        }
        if other.coeff == 0.0 {
            return self.scale_ln(other.offset);
        }
        let (hi, lo) = if self.level >= other.level { (self, other) } else { (other, self) };
        let coeff = hi.coeff + lo.coeff * 10f64.powi(lo.level as i32 - hi.level as i32);
        LogMagnitude { offset: hi.offset + lo.offset, coeff, level: hi.level }
    }

    /// Quotient `self / other`, valid only while the result's levelled
    /// coefficient stays non-negative.
    pub fn div(self, other: Self) -> Self {
        if other.coeff == 0.0 {
            return self.scale_ln(-other.offset);
        }
        let d = self.ln_minus(&other);
        if other.level > 300 || d.is_infinite() {
            panic!("quotient of levelled magnitudes is not representable");
        }
        Self::plain(d)
    }

    /// `ln self - ln other`, computed without expanding common levels.
    pub fn ln_minus(&self, other: &Self) -> f64 {
        let off = self.offset - other.offset;
        if self.coeff == 0.0 && other.coeff == 0.0 {
            return off;
        }
        let top = self.level.max(other.level);
        let a = if self.coeff == 0.0 { 0.0 } else { self.coeff * 10f64.powi(self.level as i32 - top as i32) };
        let b = if other.coeff == 0.0 { 0.0 } else { other.coeff * 10f64.powi(other.level as i32 - top as i32) };
        let bracket = b - a;
        if bracket == 0.0 {
            return off;
        }
        bracket * 10f64.powi(top as i32) + off
    }

    /// `ln(self + other)`.
    pub fn add(self, other: Self) -> Self {
        let d = self.ln_minus(&other);
        if d >= 0.0 {
            self.scale_ln((-d).exp().ln_1p())
        } else {
            other.scale_ln(d.exp().ln_1p())
        }
    }

    /// `ln(self - other)`; `None` unless `self > other`.
    pub fn sub(self, other: Self) -> Option<Self> {
        let d = self.ln_minus(&other);
        if d <= 0.0 {
            return None;
        }
        Some(self.scale_ln((-(-d).exp()).ln_1p()))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln_minus(other).partial_cmp(&0.0)
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff == 0.0 {
            write!(f, "ln={}", self.offset)
        } else {
            write!(f, "ln={}-{}e{}", self.offset, self.coeff, self.level)
        }
    }
}

/// A signed real number whose magnitude is a [`LogMagnitude`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    sign: i8,
    mag: LogMagnitude,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, mag: LogMagnitude::ONE };

    pub fn new(sign: i8, mag: LogMagnitude) -> Self {
        match sign.signum() {
            0 => Self::ZERO,
            s => SignedLog { sign: s, mag },
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if x > 0.0 { 1 } else { -1 }, mag: LogMagnitude::from_value(x.abs()) }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Magnitude, or `None` for zero.
    pub fn magnitude(&self) -> Option<LogMagnitude> {
        (self.sign != 0).then_some(self.mag)
    }

    /// `ln|x|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.mag.ln()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.mag.value()
        }
    }

    pub fn neg(self) -> Self {
        SignedLog { sign: -self.sign, ..self }
    }

    /// Multiply by `e^d`.
    pub fn scale_ln(self, d: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog { sign: self.sign, mag: self.mag.scale_ln(d) }
        }
    }

    pub fn mul_f64(self, k: f64) -> Self {
        if self.sign == 0 || k == 0.0 {
            return Self::ZERO;
        }
        let sign = if k > 0.0 { self.sign } else { -self.sign };
        SignedLog { sign, mag: self.mag.scale_ln(k.abs().ln()) }
    }

    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return SignedLog { sign: self.sign, mag: self.mag.add(other.mag) };
        }
        let d = self.mag.ln_minus(&other.mag);
        if d == 0.0 {
            Self::ZERO
        } else if d > 0.0 {
            SignedLog { sign: self.sign, mag: self.mag.sub(other.mag).expect("d > 0") }
        } else {
            SignedLog { sign: other.sign, mag: other.mag.sub(self.mag).expect("d < 0") }
        }
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "+exp({})", self.mag),
            _ => write!(f, "-exp({})", self.mag),
        }
    }
}
