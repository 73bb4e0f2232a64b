use super::{Configuration, MachineSpec};
use crate::error::Error;
use crate::logmag::LogMagnitude;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{LN_2, LOG10_2};
use std::fmt;

const LN_3: f64 = 1.098_612_288_668_109_6;
const LN_5: f64 = 1.609_437_912_434_100_3;

/// The point `1/(2^q 3^r 5^s)`, or `1 - 1/(2^q 3^r 5^s)` for the halting variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedPoint {
    pub q: u32,
    pub r: BigUint,
    pub s: BigUint,
    pub halting_variant: bool,
}

/// Encode a configuration's tape with state `q`.
pub fn encode(c: &Configuration, q: u32, halting_variant: Option<&MachineSpec>) -> EncodedPoint {
    let hv = halting_variant.is_some_and(|m| m.halt() == q);
    EncodedPoint { q, r: c.r.clone(), s: c.s.clone(), halting_variant: hv }
}

fn log10_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits").log10();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64 bits");
    top.log10() + shift as f64 * LOG10_2
}

impl EncodedPoint {
    pub fn of(c: &Configuration) -> Self {
        EncodedPoint { q: c.q, r: c.r.clone(), s: c.s.clone(), halting_variant: false }
    }

    /// `ln(2^q 3^r 5^s)` as a positive quantity in levelled form, returned as
    /// the magnitude `1/(2^q 3^r 5^s)`.
    pub fn ln_phi(&self) -> LogMagnitude {
        let small = self.r.bits() <= 900 && self.s.bits() <= 900;
        if small {
            let v =
                self.q as f64 * LN_2 + self.r.to_f64().expect("fits") * LN_3 + self.s.to_f64().expect("fits") * LN_5;
            return LogMagnitude::from_neg_ln(v);
        }
        let mut logs = vec![(self.q as f64 * LN_2).log10()];
        if !self.r.is_zero() {
            logs.push(log10_big(&self.r) + LN_3.log10());
        }
        if !self.s.is_zero() {
            logs.push(log10_big(&self.s) + LN_5.log10());
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).floor();
        let coeff: f64 = logs.iter().map(|l| 10f64.powf(l - top)).sum();
        LogMagnitude::levelled(0.0, coeff, top as u32)
    }

    /// `ln α` where α is the point's value.
    pub fn ln_value(&self) -> LogMagnitude {
        let phi = self.ln_phi();
        if self.halting_variant {
            LogMagnitude::plain((-phi.value()).ln_1p())
        } else {
            phi
        }
    }

    /// Interval half-width `α/32`.
    pub fn ln_half_width(&self) -> LogMagnitude {
        self.ln_value().scale_ln(-5.0 * LN_2)
    }

    /// α as a float (underflows to 0 for long tapes).
    pub fn value_f64(&self) -> f64 {
        self.ln_value().value()
    }

    /// Center of the translated interval in band `i`.
    pub fn center(&self, band: usize) -> f64 {
        2.0 * band as f64 + self.value_f64()
    }

    /// `2^q 3^r 5^s` exactly; fails if an exponent does not fit in `u32`.
    pub fn denominator(&self) -> Result<BigUint, Error> {
        let r = self.r.to_u32().ok_or_else(|| Error::Config("exponent r too large to expand".into()))?;
        let s = self.s.to_u32().ok_or_else(|| Error::Config("exponent s too large to expand".into()))?;
        Ok(BigUint::from(2u32).pow(self.q) * BigUint::from(3u32).pow(r) * BigUint::from(5u32).pow(s))
    }

    /// α exactly.
    pub fn value_exact(&self) -> Result<BigRational, Error> {
        let phi = BigRational::new(BigInt::one(), BigInt::from(self.denominator()?));
        Ok(if self.halting_variant { BigRational::one() - phi } else { phi })
    }
}

impl fmt::Display for EncodedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.halting_variant { "1-" } else { "" };
        write!(f, "{v}1/(2^{} 3^{} 5^{})", self.q, self.r, self.s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl ExactInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn overlaps(&self, other: &ExactInterval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

/// `(α - α/32 + 2i, α + α/32 + 2i)` with exact endpoints.
pub fn interval_of(p: &EncodedPoint, band: usize) -> Result<ExactInterval, Error> {
    let a = p.value_exact()?;
    let hw = &a / BigRational::from_integer(BigInt::from(32));
    let shift = BigRational::from_integer(BigInt::from(2 * band));
    Ok(ExactInterval { lo: &a - &hw + &shift, hi: &a + &hw + &shift })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputPoint {
    pub index: usize,
    pub config: Configuration,
    pub point: EncodedPoint,
}

/// The first `count` inputs `(q0, r, s)`, ordered by ascending `3^r 5^s`
/// (descending as points of `[0, 1]`).
pub fn enumerate_inputs(spec: &MachineSpec, count: usize) -> Vec<InputPoint> {
    let key = |r: u32, s: u32| BigUint::from(3u32).pow(r) * BigUint::from(5u32).pow(s);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((key(0, 0), 0u32, 0u32)));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let Reverse((_, r, s)) = heap.pop().expect("heap never empties");
        heap.push(Reverse((key(r, s + 1), r, s + 1)));
        if s == 0 {
            heap.push(Reverse((key(r + 1, 0), r + 1, 0)));
        }
        let config = Configuration::from_small(spec.start(), r as u64, s as u64);
        let point = EncodedPoint::of(&config);
        out.push(InputPoint { index: out.len(), config, point });
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub points: usize,
    pub width_exact: usize,
    pub overlapping_pairs: usize,
    pub first_overlaps: Vec<((u32, u32, u32), (u32, u32, u32))>,
    pub gap_violations: usize,
    pub first_gap_violations: Vec<((u32, u32, u32), (u32, u32, u32))>,
}

impl SoundnessReport {
    pub fn disjoint(&self) -> bool {
        self.overlapping_pairs == 0
    }

    pub fn gap_ok(&self) -> bool {
        self.gap_violations == 0
    }

    pub fn width_ok(&self) -> bool {
        self.width_exact == self.points
    }
}

/// Exhaustive check of the interval encoding over all `(q, r, s)`, `q >= 1`,
/// with `2^q 3^r 5^s <= limit`.
pub fn encoding_soundness(limit: u64) -> SoundnessReport {
    let mut pts: Vec<(u64, (u32, u32, u32))> = Vec::new();
    let mut p2 = 2u64;
    let mut q = 1u32;
    while p2 <= limit {
        let mut p3 = p2;
        let mut r = 0u32;
        while p3 <= limit {
            let mut n = p3;
            let mut s = 0u32;
            while n <= limit {
                pts.push((n, (q, r, s)));
                n *= 5;
                s += 1;
            }
            p3 *= 3;
            r += 1;
        }
        p2 *= 2;
        q += 1;
    }
    pts.sort();
    let mut rep = SoundnessReport { points: pts.len(), ..Default::default() };
    let ivs: Vec<ExactInterval> = pts
        .iter()
        .map(|&(_, (q, r, s))| {
            let p = EncodedPoint { q, r: r.into(), s: s.into(), halting_variant: false };
            interval_of(&p, 0).expect("small exponents")
        })
        .collect();
    for (k, &(n, (q, r, s))) in pts.iter().enumerate() {
        let expect = BigRational::new(BigInt::one(), BigInt::from(n) * BigInt::from(16));
        if ivs[k].width() == expect {
            rep.width_exact += 1;
        }
        for (j, &(m, t)) in pts.iter().enumerate().skip(k + 1) {
            if ivs[k].overlaps(&ivs[j]) {
                rep.overlapping_pairs += 1;
                if rep.first_overlaps.len() < 8 {
                    rep.first_overlaps.push(((q, r, s), t));
                }
            }
            // n < m, so 1/m lies in (1/(2n), 2/n) iff m < 2n, and symmetrically
            if m < 2 * n {
                rep.gap_violations += 1;
                if rep.first_gap_violations.len() < 8 {
                    rep.first_gap_violations.push(((q, r, s), t));
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::presets;

    fn pt(q: u32, r: u32, s: u32) -> EncodedPoint {
        EncodedPoint { q, r: r.into(), s: s.into(), halting_variant: false }
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn encode_values() {
        assert_eq!(pt(1, 0, 0).value_exact().unwrap(), rat(1, 2));
        assert_eq!(pt(2, 1, 0).value_exact().unwrap(), rat(1, 12));
        let act = crate::machine::Action { next: 3, write: 0, shift: crate::machine::Shift::Stay };
        let rules = (1..=2u32).flat_map(|q| (0..10u8).map(move |d| ((q, d), act)));
        let m = MachineSpec::new("h", 3, 1, 3, rules).unwrap();
        let p = encode(&Configuration::blank(3), 3, Some(&m));
        assert!(p.halting_variant);
        assert_eq!(p.value_exact().unwrap(), rat(7, 8));
    }

    #[test]
    fn interval_endpoints() {
        let iv = interval_of(&pt(1, 0, 0), 0).unwrap();
        assert_eq!(iv, ExactInterval { lo: rat(31, 64), hi: rat(33, 64) });
        assert_eq!(iv.width(), rat(1, 32));
        let iv2 = interval_of(&pt(1, 0, 0), 3).unwrap();
        assert_eq!(iv2.lo, rat(31, 64) + rat(6, 1));
    }

    #[test]
    fn half_width_log_matches_exact() {
        let p = pt(3, 4, 2);
        let exact = 1.0 / (8.0 * 81.0 * 25.0 * 32.0);
        assert!((p.ln_half_width().ln() - f64::ln(exact)).abs() < 1e-12);
    }

    #[test]
    fn huge_exponents_stay_levelled() {
        let r = BigUint::from(10u32).pow(400);
        let p = EncodedPoint { q: 1, r: r.clone(), s: BigUint::zero(), halting_variant: false };
        let lm = p.ln_phi();
        assert_eq!(lm.level(), 400);
        assert!((lm.coeff() - LN_3).abs() < 1e-12);
    }

    #[test]
    fn enumeration_order() {
        let ins = enumerate_inputs(&presets::incrementer(), 7);
        let rs: Vec<(u64, u64)> =
            ins.iter().map(|p| (p.config.r.to_u64().unwrap(), p.config.s.to_u64().unwrap())).collect();
        assert_eq!(rs, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)]);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let mut all: Vec<(u64, u32, u32)> =
            (0..=10).flat_map(|r| (0..=10).map(move |s| (3u64.pow(r) * 5u64.pow(s), r, s))).collect();
        all.sort();
        let ins = enumerate_inputs(&presets::incrementer(), 30);
        for (k, p) in ins.iter().enumerate() {
            assert_eq!(p.config.r.to_u32().unwrap(), all[k].1);
            assert_eq!(p.config.s.to_u32().unwrap(), all[k].2);
        }
    }
}
