use super::{Configuration, MachineSpec};
use crate::error::Error;
use num_bigint::BigUint;
use std::collections::HashMap;

/// A machine restricted to absolute tape positions `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeBoundedSpec {
    pub base: MachineSpec,
    lo: i64,
    hi: i64,
}

impl TapeBoundedSpec {
    pub fn new(base: MachineSpec, lo: i64, hi: i64) -> Result<Self, Error> {
        if lo > 0 || hi <= 0 {
            return Err(Error::Config(format!("bounds must satisfy lo <= 0 < hi, got [{lo}, {hi}]")));
        }
        Ok(TapeBoundedSpec { base, lo, hi })
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    /// `s_b = b+ - b- + 1`.
    pub fn tape_size(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }

    pub fn contains(&self, pos: i64) -> bool {
        (self.lo..=self.hi).contains(&pos)
    }

    /// Whether an initial tape (head at absolute 0) fits the bounds.
    pub fn fits(&self, c: &Configuration) -> bool {
        c.extent().is_none_or(|(a, b)| self.contains(a) && self.contains(b))
    }

    /// Transitions after which the configuration space is certainly exhausted.
    pub fn exhaustive_budget(&self) -> BigUint {
        let sb = self.tape_size();
        BigUint::from(self.base.states()) * sb * BigUint::from(10u32).pow(sb as u32) + 1u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedVerdict {
    Halted {
        output: Configuration,
        steps: u64,
    },
    /// The transition with index `steps` would move the head outside the bounds.
    OutOfMemory {
        steps: u64,
    },
    /// The configuration at `steps` repeats the one first seen at `first`.
    Loop {
        first: u64,
        steps: u64,
    },
    Unresolved,
}

impl BoundedVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            BoundedVerdict::Halted { .. } => "HALTED",
            BoundedVerdict::OutOfMemory { .. } => "OOM",
            BoundedVerdict::Loop { .. } => "LOOP",
            BoundedVerdict::Unresolved => "UNRESOLVED",
        }
    }
}

/// Direct execution with the three-way classification halt / out of memory / loop.
pub fn run_bounded(tb: &TapeBoundedSpec, c0: &Configuration, max_steps: u64) -> Result<BoundedVerdict, Error> {
    if !tb.fits(c0) {
        return Err(Error::TapeOutOfBounds { lo: tb.lo, hi: tb.hi });
    }
    let m = &tb.base;
    let mut seen = HashMap::new();
    let mut c = c0.clone();
    let mut head = 0i64;
    let mut n = 0u64;
    loop {
        if c.q == m.halt() {
            return Ok(BoundedVerdict::Halted { output: c, steps: n });
        }
        if let Some(&first) = seen.get(&(c.clone(), head)) {
            return Ok(BoundedVerdict::Loop { first, steps: n });
        }
        seen.insert((c.clone(), head), n);
        if n >= max_steps {
            return Ok(BoundedVerdict::Unresolved);
        }
        let (next, shift) = m.step_with_shift(&c);
        let new_head = head + shift.map_or(0, |s| s.head_delta());
        if !tb.contains(new_head) {
            return Ok(BoundedVerdict::OutOfMemory { steps: n + 1 });
        }
        head = new_head;
        c = next;
        n += 1;
    }
}
