use super::{MachineSpec, Shift};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A state together with a finitely supported tape, stored as the pair of
/// integers `r = t_b..t_0` and `s = t_{-a}..t_{-1}` (decimal digit strings).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub q: u32,
    pub r: BigUint,
    pub s: BigUint,
}

impl Configuration {
    pub fn new(q: u32, r: BigUint, s: BigUint) -> Self {
        Configuration { q, r, s }
    }

    pub fn blank(q: u32) -> Self {
        Configuration { q, r: BigUint::zero(), s: BigUint::zero() }
    }

    pub fn from_small(q: u32, r: u64, s: u64) -> Self {
        Configuration { q, r: r.into(), s: s.into() }
    }

    /// Build from nonzero cells `(position, digit)`; position 0 is under the head.
    pub fn from_cells(q: u32, cells: &BTreeMap<i64, u8>) -> Self {
        let mut r = BigUint::zero();
        let mut s = BigUint::zero();
        let ten = BigUint::from(10u32);
        for (&p, &d) in cells.iter().rev() {
            if p >= 0 && d != 0 {
                r += BigUint::from(d) * ten.pow(p as u32);
            }
        }
        for (&p, &d) in cells.iter() {
            if p < 0 && d != 0 {
                s += BigUint::from(d) * ten.pow((-p - 1) as u32);
            }
        }
        Configuration { q, r, s }
    }

    /// Nonzero cells, keyed by position.
    pub fn cells(&self) -> BTreeMap<i64, u8> {
        let mut out = BTreeMap::new();
        for (k, d) in digits(&self.r).into_iter().enumerate() {
            if d != 0 {
                out.insert(k as i64, d);
            }
        }
        for (k, d) in digits(&self.s).into_iter().enumerate() {
            if d != 0 {
                out.insert(-(k as i64) - 1, d);
            }
        }
        out
    }

    /// Symbol at tape position `p` (0 under the head).
    pub fn digit(&self, p: i64) -> u8 {
        let (n, k) = if p >= 0 { (&self.r, p as u32) } else { (&self.s, (-p - 1) as u32) };
        let shifted = n / BigUint::from(10u32).pow(k);
        (shifted % 10u32).to_u8().expect("digit < 10")
    }

    pub fn head_symbol(&self) -> u8 {
        (&self.r % 10u32).to_u8().expect("digit < 10")
    }

    /// Leftmost and rightmost nonzero positions, `None` for the blank tape.
    pub fn extent(&self) -> Option<(i64, i64)> {
        let cells = self.cells();
        let lo = *cells.keys().next()?;
        let hi = *cells.keys().next_back()?;
        Some((lo, hi))
    }

    /// Cells between the outermost nonzero symbols, inclusive; 0 when blank.
    pub fn tape_size(&self) -> u64 {
        self.extent().map_or(0, |(lo, hi)| (hi - lo + 1) as u64)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, r={}, s={})", self.q, self.r, self.s)
    }
}

fn digits(n: &BigUint) -> Vec<u8> {
    if n.is_zero() {
        return Vec::new();
    }
    n.to_radix_le(10)
}

impl MachineSpec {
    /// The global transition; halting configurations are fixed.
    pub fn step(&self, c: &Configuration) -> Configuration {
        self.step_with_shift(c).0
    }

    /// The transition together with the tape shift applied (`None` when halted).
    pub fn step_with_shift(&self, c: &Configuration) -> (Configuration, Option<Shift>) {
        if c.q == self.halt() {
            return (c.clone(), None);
        }
        let (hi, t0) = c.r.div_rem(&BigUint::from(10u32));
        let a = self.rule(c.q, t0.to_u8().expect("digit")).expect("rule table is total on non-halting states");
        let w = BigUint::from(a.write);
        let next = match a.shift {
            Shift::Stay => Configuration { q: a.next, r: hi * 10u32 + w, s: c.s.clone() },
            Shift::Left => Configuration { q: a.next, r: hi, s: &c.s * 10u32 + w },
            Shift::Right => {
                let (s_hi, s0) = c.s.div_rem(&BigUint::from(10u32));
                Configuration { q: a.next, r: (hi * 10u32 + w) * 10u32 + s0, s: s_hi }
            }
        };
        (next, Some(a.shift))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunVerdict {
    Halted { output: Configuration, steps: u64 },
    Unresolved,
}

/// Iterate the transition until the halting state or `max_steps` transitions.
pub fn run(spec: &MachineSpec, c0: &Configuration, max_steps: u64) -> RunVerdict {
    let mut c = c0.clone();
    for n in 0..=max_steps {
        if c.q == spec.halt() {
            return RunVerdict::Halted { output: c, steps: n };
        }
        if n < max_steps {
            c = spec.step(&c);
        }
    }
    RunVerdict::Unresolved
}

/// `c0, Δ(c0), …, Δ^n(c0)`.
pub fn trace(spec: &MachineSpec, c0: &Configuration, n: usize) -> Vec<Configuration> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(c0.clone());
    for _ in 0..n {
        let next = spec.step(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{presets, Action};

    fn one_rule(q_next: u32, write: u8, shift: Shift) -> MachineSpec {
        let rules = (0..10u8).map(|d| ((1, d), Action { next: q_next, write, shift }));
        MachineSpec::new("t", 2, 1, 2, rules).unwrap()
    }

    #[test]
    fn halting_is_fixed() {
        let m = presets::incrementer();
        let c = Configuration::from_small(2, 1234, 56);
        assert_eq!(m.step(&c), c);
    }

    #[test]
    fn write_without_shift() {
        let m = one_rule(2, 7, Shift::Stay);
        assert_eq!(m.step(&Configuration::blank(1)), Configuration::from_small(2, 7, 0));
    }

    #[test]
    fn left_shift_moves_written_digit_to_minus_one() {
        let m = one_rule(2, 1, Shift::Left);
        assert_eq!(m.step(&Configuration::blank(1)), Configuration::from_small(2, 0, 1));
    }

    #[test]
    fn right_shift_pulls_from_s() {
        let m = one_rule(2, 4, Shift::Right);
        // tape ... 3 9 | [5] 2 ...: r = 25, s = 93
        let c = Configuration::from_small(1, 25, 93);
        // write 4 -> r = 24, then shift right: new t0 = 3, t1 = 4, t2 = 2
        assert_eq!(m.step(&c), Configuration::from_small(2, 243, 9));
    }

    #[test]
    fn run_instant_and_loop() {
        let c = Configuration::from_small(1, 42, 7);
        assert_eq!(run(&presets::instant(), &c, 0), RunVerdict::Halted { output: c.clone(), steps: 0 });
        assert_eq!(run(&presets::looping(), &Configuration::blank(1), 10), RunVerdict::Unresolved);
    }

    #[test]
    fn incrementer_blank() {
        let v = run(&presets::incrementer(), &Configuration::blank(1), 10);
        assert_eq!(v, RunVerdict::Halted { output: Configuration::from_small(2, 1, 0), steps: 1 });
    }

    #[test]
    fn incrementer_carries() {
        // 99 + 1: two carries, each shifting the tape left
        let v = run(&presets::incrementer(), &Configuration::from_small(1, 99, 0), 10);
        assert_eq!(v, RunVerdict::Halted { output: Configuration::from_small(2, 1, 0), steps: 3 });
    }

    #[test]
    fn tape_size_counts_inner_blanks() {
        let c = Configuration::from_small(1, 105, 3);
        assert_eq!(c.extent(), Some((-1, 2)));
        assert_eq!(c.tape_size(), 4);
        assert_eq!(Configuration::blank(1).tape_size(), 0);
        assert_eq!(c.digit(1), 0);
        assert_eq!(c.digit(-1), 3);
    }
}
