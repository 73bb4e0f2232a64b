//! Turing machines over the decimal alphabet, their global transition and
//! the prime-power encoding of configurations.
//!
//! Shift convention: the token `S+1` shifts the tape one cell to the left
//! (the head effectively moves right), `S-1` shifts it to the right.

mod bounded;
mod config;
mod encode;

pub use bounded::{run_bounded, BoundedVerdict, TapeBoundedSpec};
pub use config::{run, trace, Configuration, RunVerdict};
pub use encode::{
    encode, encoding_soundness, enumerate_inputs, interval_of, EncodedPoint, ExactInterval, InputPoint, SoundnessReport,
};

use crate::error::ParseError;
use std::fmt;

pub const ALPHABET: u8 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shift {
    /// `S+1`: tape moves left.
    Left,
    Stay,
    /// `S-1`: tape moves right.
    Right,
}

impl Shift {
    /// Signed shift ε ∈ {+1, 0, -1}.
    pub fn epsilon(self) -> i8 {
        match self {
            Shift::Left => 1,
            Shift::Stay => 0,
            Shift::Right => -1,
        }
    }

    /// Change of the absolute head position.
    pub fn head_delta(self) -> i64 {
        self.epsilon() as i64
    }

    fn token(self) -> &'static str {
        match self {
            Shift::Left => "S+1",
            Shift::Stay => "S0",
            Shift::Right => "S-1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub next: u32,
    pub write: u8,
    pub shift: Shift,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSpec {
    pub name: String,
    states: u32,
    start: u32,
    halt: u32,
    // indexed by (q - 1) * 10 + symbol; None exactly for the halting state
    rules: Vec<Option<Action>>,
}

impl MachineSpec {
    /// Build from a rule list; the table must be total on non-halting states.
    pub fn new(
        name: impl Into<String>,
        states: u32,
        start: u32,
        halt: u32,
        rules: impl IntoIterator<Item = ((u32, u8), Action)>,
    ) -> Result<Self, ParseError> {
        let mut b = Builder::new(states, start, halt, 0)?;
        for ((q, d), a) in rules {
            b.insert(0, q, d, a)?;
        }
        b.finish(name.into())
    }

    pub fn states(&self) -> u32 {
        self.states
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn halt(&self) -> u32 {
        self.halt
    }

    pub fn rule(&self, q: u32, symbol: u8) -> Option<Action> {
        if q == 0 || q > self.states || symbol >= ALPHABET {
            return None;
        }
        self.rules[((q - 1) * ALPHABET as u32 + symbol as u32) as usize]
    }

    /// Parse the line-oriented machine format.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut name = None;
        let mut states = None;
        let mut start = None;
        let mut halt = None;
        let mut pending = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let syntax = |msg: &str| ParseError::Syntax { line: line_no, msg: msg.to_string() };
            let num = |t: &str| t.parse::<u32>().map_err(|_| syntax(&format!("expected a number, got `{t}`")));
            match toks[0] {
                "machine" => {
                    if toks.len() < 2 {
                        return Err(syntax("machine needs a name"));
                    }
                    name = Some(toks[1..].join(" "));
                }
                "states" | "start" | "halt" => {
                    if toks.len() != 2 {
                        return Err(syntax(&format!("`{}` takes one value", toks[0])));
                    }
                    let v = num(toks[1])?;
                    match toks[0] {
                        "states" => states = Some(v),
                        "start" => start = Some(v),
                        _ => halt = Some(v),
                    }
                }
                "rule" => {
                    if toks.len() != 7 || toks[3] != "->" {
                        return Err(syntax("expected `rule <q> <sym> -> <q'> <sym'> <S+1|S0|S-1>`"));
                    }
                    let q = num(toks[1])?;
                    let d = parse_symbol(toks[2]).ok_or_else(|| syntax("symbol must be a digit 0-9"))?;
                    let next = num(toks[4])?;
                    let write = parse_symbol(toks[5]).ok_or_else(|| syntax("symbol must be a digit 0-9"))?;
                    let shift = match toks[6] {
                        "S+1" => Shift::Left,
                        "S0" => Shift::Stay,
                        "S-1" | "S\u{2212}1" => Shift::Right,
                        other => return Err(syntax(&format!("unknown shift `{other}`"))),
                    };
                    pending.push((line_no, q, d, Action { next, write, shift }));
                }
                other => return Err(syntax(&format!("unknown keyword `{other}`"))),
            }
        }
        let states = states.ok_or(ParseError::MissingHeader("states"))?;
        let start = start.ok_or(ParseError::MissingHeader("start"))?;
        let halt = halt.ok_or(ParseError::MissingHeader("halt"))?;
        let mut b = Builder::new(states, start, halt, 0)?;
        for (line, q, d, a) in pending {
            b.insert(line, q, d, a)?;
        }
        b.finish(name.unwrap_or_else(|| "unnamed".to_string()))
    }

    /// Canonical text form; parsing it gives back an equal machine.
    pub fn to_text(&self) -> String {
        let mut out =
            format!("machine {}\nstates {}\nstart {}\nhalt {}\n", self.name, self.states, self.start, self.halt);
        for q in 1..=self.states {
            for d in 0..ALPHABET {
                if let Some(a) = self.rule(q, d) {
                    out.push_str(&format!("rule {q} {d} -> {} {} {}\n", a.next, a.write, a.shift.token()));
                }
            }
        }
        out
    }
}

impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} states, start {}, halt {})", self.name, self.states, self.start, self.halt)
    }
}

fn parse_symbol(t: &str) -> Option<u8> {
    let v: u8 = t.parse().ok()?;
    (v < ALPHABET).then_some(v)
}

struct Builder {
    states: u32,
    start: u32,
    halt: u32,
    rules: Vec<Option<Action>>,
}

impl Builder {
    fn new(states: u32, start: u32, halt: u32, line: usize) -> Result<Self, ParseError> {
        let bad = |msg: String| ParseError::Syntax { line, msg };
        if states == 0 {
            return Err(bad("a machine needs at least one state".into()));
        }
        if start == 0 || start > states {
            return Err(bad(format!("start state {start} outside 1..={states}")));
        }
        if halt == 0 || halt > states {
            return Err(bad(format!("halting state {halt} outside 1..={states}")));
        }
        Ok(Builder { states, start, halt, rules: vec![None; (states * ALPHABET as u32) as usize] })
    }

    fn insert(&mut self, line: usize, q: u32, d: u8, a: Action) -> Result<(), ParseError> {
        let bad = |msg: String| ParseError::Syntax { line, msg };
        if q == 0 || q > self.states {
            return Err(bad(format!("state {q} outside 1..={}", self.states)));
        }
        if a.next == 0 || a.next > self.states {
            return Err(bad(format!("state {} outside 1..={}", a.next, self.states)));
        }
        if d >= ALPHABET || a.write >= ALPHABET {
            return Err(bad("symbol must be a digit 0-9".into()));
        }
        if q == self.halt {
            return Err(bad(format!("no rule may be given for the halting state {q}")));
        }
        let slot = &mut self.rules[((q - 1) * ALPHABET as u32 + d as u32) as usize];
        if slot.is_some() {
            return Err(ParseError::DuplicateRule { line, state: q, symbol: d });
        }
        *slot = Some(a);
        Ok(())
    }

    fn finish(self, name: String) -> Result<MachineSpec, ParseError> {
        for q in 1..=self.states {
            if q == self.halt {
                continue;
            }
            for d in 0..ALPHABET {
                if self.rules[((q - 1) * ALPHABET as u32 + d as u32) as usize].is_none() {
                    return Err(ParseError::MissingRule { state: q, symbol: d });
                }
            }
        }
        Ok(MachineSpec { name, states: self.states, start: self.start, halt: self.halt, rules: self.rules })
    }
}

/// Machines shipped with the crate, used by tests and demos.
pub mod presets {
    use super::MachineSpec;

    pub const INSTANT: &str = include_str!("../../machines/instant.tm");
    pub const INCREMENTER: &str = include_str!("../../machines/incrementer.tm");
    pub const COUNTDOWN: &str = include_str!("../../machines/countdown.tm");
    pub const LOOP: &str = include_str!("../../machines/loop.tm");
    pub const BOUNCE: &str = include_str!("../../machines/bounce.tm");
    pub const RUNAWAY: &str = include_str!("../../machines/runaway.tm");

    pub fn instant() -> MachineSpec {
        MachineSpec::parse(INSTANT).expect("preset parses")
    }

    pub fn incrementer() -> MachineSpec {
        MachineSpec::parse(INCREMENTER).expect("preset parses")
    }

    pub fn countdown() -> MachineSpec {
        MachineSpec::parse(COUNTDOWN).expect("preset parses")
    }

    pub fn bounce() -> MachineSpec {
        MachineSpec::parse(BOUNCE).expect("preset parses")
    }

    pub fn looping() -> MachineSpec {
        MachineSpec::parse(LOOP).expect("preset parses")
    }

    pub fn runaway() -> MachineSpec {
        MachineSpec::parse(RUNAWAY).expect("preset parses")
    }

    pub fn by_name(name: &str) -> Option<MachineSpec> {
        match name {
            "instant" => Some(instant()),
            "incrementer" => Some(incrementer()),
            "countdown" => Some(countdown()),
            "loop" => Some(looping()),
            "bounce" => Some(bounce()),
            "runaway" => Some(runaway()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reports_line_numbers() {
        let text = "machine x\nstates 1\nstart 1\nhalt 1\n\nrule 1 0 -> 1 0 S0\n";
        match MachineSpec::parse(text) {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_rule_rejected() {
        let mut text = String::from("machine d\nstates 2\nstart 1\nhalt 2\n");
        for d in 0..10 {
            text.push_str(&format!("rule 1 {d} -> 2 {d} S0\n"));
        }
        text.push_str("rule 1 3 -> 1 0 S+1\n");
        assert_eq!(MachineSpec::parse(&text), Err(ParseError::DuplicateRule { line: 15, state: 1, symbol: 3 }));
    }

    #[test]
    fn missing_rule_rejected() {
        let text = "states 2\nstart 1\nhalt 2\nrule 1 0 -> 2 0 S0\n";
        assert!(matches!(MachineSpec::parse(text), Err(ParseError::MissingRule { state: 1, symbol: 1 })));
    }

    #[test]
    fn presets_roundtrip_text() {
        for name in ["instant", "incrementer", "countdown", "loop", "bounce", "runaway"] {
            let m = presets::by_name(name).unwrap();
            assert_eq!(MachineSpec::parse(&m.to_text()).unwrap(), m);
        }
    }
}
