use crate::error::Error;
use crate::logmag::LogMagnitude;
use std::f64::consts::LN_10;

/// Robustness `ε = C exp(-exp(exp(C s_b)))` and energy `H¹ = C exp(exp(exp(C s_b)))`
/// for tape size `s_b`, both held in levelled log form.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceEstimate {
    pub s_b: u32,
    pub c: f64,
    /// The magnitude `ε`.
    pub eps: LogMagnitude,
    /// The magnitude `1/H¹`.
    pub inv_h1: LogMagnitude,
}

// exp(exp(x)) as (coeff, level) with coeff·10^level = exp(exp(x))
fn double_exp_levelled(x: f64) -> (f64, u32) {
    let l10 = x.exp() / LN_10;
    if l10 < 1.0 {
        return ((x.exp()).exp(), 0);
    }
    let level = l10.floor();
    (10f64.powf(l10 - level), level as u32)
}

pub fn resource_estimate(s_b: u32, c: f64) -> Result<ResourceEstimate, Error> {
    if s_b < 1 || !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config("resource estimate needs s_b >= 1 and C > 0".into()));
    }
    let x = c * s_b as f64;
    if x.exp() / LN_10 > 1e9 {
        return Err(Error::Config(format!("C s_b = {x} is beyond the levelled range")));
    }
    let (coeff, level) = double_exp_levelled(x);
    Ok(ResourceEstimate {
        s_b,
        c,
        eps: LogMagnitude::levelled(c.ln(), coeff, level),
        inv_h1: LogMagnitude::levelled(-c.ln(), coeff, level),
    })
}

impl ResourceEstimate {
    /// `C s_b`, the innermost exponent.
    pub fn inner(&self) -> f64 {
        self.c * self.s_b as f64
    }

    /// `ln ε = ln C - exp(exp(C s_b))`.
    pub fn ln_eps(&self) -> f64 {
        self.eps.ln()
    }

    /// Memory `ln M = ln(-ln ε)` with `M ~ log(1/ε)`.
    pub fn ln_memory(&self) -> f64 {
        let e = self.inner().exp();
        // -ln ε = e^{e^x} - ln C = e^{e^x}(1 - ln C e^{-e^x})
        e + (-self.c.ln() * (-e).exp()).ln_1p()
    }

    /// `ln ln H¹ = ln(ln C + exp(exp(C s_b)))`.
    pub fn h1_lnln(&self) -> f64 {
        let e = self.inner().exp();
        e + (self.c.ln() * (-e).exp()).ln_1p()
    }

    /// `ln ln ln H¹`.
    pub fn h1_lnlnln(&self) -> f64 {
        self.h1_lnln().ln()
    }

    /// `(−ln ε)` as `coeff·10^level` minus `ln C`, in decimal exponent form:
    /// `level + log10(coeff) = exp(C s_b)/ln 10`.
    pub fn decimal_exponent(&self) -> f64 {
        self.eps.level() as f64 + self.eps.coeff().log10()
    }
}

/// Tape size read back from memory: `s_b = ln(ln M)/C`.
pub fn tape_from_memory(ln_memory: f64, c: f64) -> f64 {
    ln_memory.ln() / c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn unit_constants() {
        let r = resource_estimate(1, 1.0).unwrap();
        assert_eq!(r.h1_lnln(), E);
        assert_eq!(r.h1_lnlnln(), 1.0);
        assert!((r.ln_eps() + E.exp()).abs() < 1e-12);
    }

    #[test]
    fn nested_form() {
        for (s_b, c) in [(1, 0.5), (2, 1.0), (3, 0.7), (4, 0.9)] {
            let r = resource_estimate(s_b, c).unwrap();
            let x: f64 = c * s_b as f64;
            assert!((r.decimal_exponent() - x.exp() / LN_10).abs() < 1e-12 * x.exp());
            let expect = c.ln() - x.exp().exp();
            assert!((r.ln_eps() - expect).abs() <= 1e-12 * expect.abs());
        }
    }

    #[test]
    fn monotone_in_tape() {
        let mut prev = resource_estimate(1, 0.8).unwrap();
        for s_b in 2..25 {
            let r = resource_estimate(s_b, 0.8).unwrap();
            assert!(r.eps < prev.eps);
            assert!(r.inv_h1 < prev.inv_h1);
            assert!(r.h1_lnln() > prev.h1_lnln());
            prev = r;
        }
    }

    #[test]
    fn memory_round_trip() {
        let r = resource_estimate(5, 0.6).unwrap();
        assert!((tape_from_memory(r.ln_memory(), 0.6) - 5.0).abs() < 1e-9);
        assert!(resource_estimate(60, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(resource_estimate(0, 1.0).is_err());
        assert!(resource_estimate(1, -1.0).is_err());
    }
}
