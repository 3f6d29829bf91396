//! Finite stand-ins for `{0,1}`-valued oracle functionals and for the diagonal
//! `Φ_n(n)`.
//!
//! A functional is a table of entries. An entry fires on input `n` once the
//! evaluation stage reaches its settle stage and every one of its constraints
//! holds on the joined oracle `G ⊕ C`. Entries only ever look at finitely many
//! oracle bits, which is the use principle the construction relies on.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::bitvec::BitString;
use crate::error::{Error, Result};

/// Which half of the joined oracle a constraint reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    G,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub pos: usize,
    pub side: Side,
    pub bit: bool,
}

impl Constraint {
    pub fn g(pos: usize, bit: bool) -> Self {
        Constraint {
            pos,
            side: Side::G,
            bit,
        }
    }

    pub fn c(pos: usize, bit: bool) -> Self {
        Constraint {
            pos,
            side: Side::C,
            bit,
        }
    }

    fn holds(&self, g: &BitString, c: &BitString) -> bool {
        let v = match self.side {
            Side::G => g.get(self.pos),
            Side::C => c.get(self.pos),
        };
        v == self.bit
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub input: usize,
    pub constraints: Vec<Constraint>,
    pub settle: usize,
    pub output: bool,
}

impl Entry {
    pub fn new(input: usize, constraints: Vec<Constraint>, settle: usize, output: bool) -> Self {
        Entry {
            input,
            constraints,
            settle,
            output,
        }
    }

    pub fn matches(&self, g: &BitString, c: &BitString) -> bool {
        self.constraints.iter().all(|k| k.holds(g, c))
    }

    /// No constraint of `self` contradicts one of `other` (or itself).
    pub fn jointly_satisfiable(&self, other: &Entry) -> bool {
        let all = || self.constraints.iter().chain(&other.constraints);
        all().all(|a| all().all(|b| a.pos != b.pos || a.side != b.side || a.bit == b.bit))
    }
}

/// Result of running a functional up to some stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Computation {
    Halt(bool),
    DivergentSoFar,
}

impl Computation {
    pub fn value(self) -> Option<bool> {
        match self {
            Computation::Halt(b) => Some(b),
            Computation::DivergentSoFar => None,
        }
    }

    pub fn halts(self) -> bool {
        matches!(self, Computation::Halt(_))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalTable {
    pub index: usize,
    pub entries: Vec<Entry>,
}

impl FunctionalTable {
    pub fn new(index: usize) -> Self {
        FunctionalTable {
            index,
            entries: Vec::new(),
        }
    }

    pub fn with_entries(index: usize, entries: Vec<Entry>) -> Self {
        FunctionalTable { index, entries }
    }

    pub fn push(&mut self, entry: Entry) -> &mut Self {
        self.entries.push(entry);
        self
    }

    /// Entries for input `n` that have settled by `stage`.
    pub fn settled_for(&self, n: usize, stage: usize) -> impl Iterator<Item = &Entry> {
        self.entries
            .iter()
            .filter(move |e| e.input == n && e.settle <= stage)
    }

    pub fn inputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.input)
    }
}

/// Settled diagonal values `n ↦ (Φ_n(n), settle stage)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalTable {
    pub halts: BTreeMap<usize, (bool, usize)>,
}

impl DiagonalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, n: usize, value: bool, settle: usize) -> &mut Self {
        self.halts.insert(n, (value, settle));
        self
    }
}

/// One problem found by [`Registry::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Two entries of one functional can fire together with different outputs.
    Conflict {
        functional: usize,
        input: usize,
        first: usize,
        second: usize,
    },
    OutOfRange {
        functional: usize,
        entry: usize,
        pos: usize,
    },
    ZeroSettle {
        n: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Conflict {
                functional,
                input,
                first,
                second,
            } => write!(
                f,
                "functional {functional}: entries {first} and {second} on input {input} can both fire with different outputs"
            ),
            Violation::OutOfRange {
                functional,
                entry,
                pos,
            } => write!(
                f,
                "functional {functional}: entry {entry} constrains position {pos} outside the universe"
            ),
            Violation::ZeroSettle { n } => write!(f, "diagonal value for {n} settles at stage 0"),
        }
    }
}

/// The functionals and diagonal of one instance, plus the stage budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub universe: usize,
    pub functionals: BTreeMap<usize, FunctionalTable>,
    pub diagonal: DiagonalTable,
    pub s_max: usize,
}

impl Registry {
    pub fn new(universe: usize, s_max: usize) -> Self {
        Registry {
            universe,
            functionals: BTreeMap::new(),
            diagonal: DiagonalTable::new(),
            s_max,
        }
    }

    pub fn add(&mut self, table: FunctionalTable) -> &mut Self {
        self.functionals.insert(table.index, table);
        self
    }

    /// Empty table for `index` if none is present.
    pub fn ensure(&mut self, index: usize) -> &mut FunctionalTable {
        self.functionals
            .entry(index)
            .or_insert_with(|| FunctionalTable::new(index))
    }

    pub fn functional(&self, e: usize) -> Result<&FunctionalTable> {
        self.functionals.get(&e).ok_or(Error::UnknownFunctional(e))
    }

    /// `Φ_e^{g ⊕ c}(n)` run for `stage` steps.
    pub fn eval(
        &self,
        e: usize,
        g: &BitString,
        c: &BitString,
        n: usize,
        stage: usize,
    ) -> Result<Computation> {
        if stage > self.s_max {
            return Err(Error::StageBudget {
                stage,
                s_max: self.s_max,
            });
        }
        let table = self.functional(e)?;
        Ok(table
            .settled_for(n, stage)
            .find(|entry| entry.matches(g, c))
            .map_or(Computation::DivergentSoFar, |entry| Computation::Halt(entry.output)))
    }

    /// `eval` at the full stage budget.
    pub fn eval_final(&self, e: usize, g: &BitString, c: &BitString, n: usize) -> Result<Computation> {
        self.eval(e, g, c, n, self.s_max)
    }

    /// `Φ_n(n)` run for `stage` steps.
    pub fn diag(&self, n: usize, stage: usize) -> Computation {
        match self.diagonal.halts.get(&n) {
            Some(&(v, settle)) if settle <= stage => Computation::Halt(v),
            _ => Computation::DivergentSoFar,
        }
    }

    /// Diagonal value at the full stage budget, if it halts.
    pub fn diag_value(&self, n: usize) -> Option<bool> {
        self.diag(n, self.s_max).value()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (&idx, table) in &self.functionals {
            for (a, ea) in table.entries.iter().enumerate() {
                for k in &ea.constraints {
                    if k.pos >= self.universe {
                        out.push(Violation::OutOfRange {
                            functional: idx,
                            entry: a,
                            pos: k.pos,
                        });
                    }
                }
                for (b, eb) in table.entries.iter().enumerate().skip(a + 1) {
                    if ea.input == eb.input
                        && ea.output != eb.output
                        && ea.jointly_satisfiable(eb)
                    {
                        out.push(Violation::Conflict {
                            functional: idx,
                            input: ea.input,
                            first: a,
                            second: b,
                        });
                    }
                }
            }
        }
        for (&n, &(_, settle)) in &self.diagonal.halts {
            if settle == 0 {
                out.push(Violation::ZeroSettle { n });
            }
        }
        out
    }

    /// Errors out listing every violation.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidRegistry(msgs.join("; ")))
        }
    }

    /// Line format:
    ///
    /// ```text
    /// S <s_max>
    /// E <e>
    /// F <e> <n> <settle> <output> <pos>:<G|C>:<bit>,...
    /// D <n> <value> <settle>
    /// ```
    ///
    /// `#` starts a comment. An `E` line declares a functional, possibly with
    /// no entries. An `F` line may omit the constraint list.
    pub fn parse(text: &str, universe: usize) -> Result<Registry> {
        let mut reg = Registry::new(universe, 0);
        let mut saw_s = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
            let bit = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(err(format!("expected a bit, got {s:?}"))),
            };
            match fields[0] {
                "S" if fields.len() == 2 => {
                    if saw_s {
                        return Err(err("duplicate S line".into()));
                    }
                    saw_s = true;
                    reg.s_max = num(fields[1])?;
                }
                "E" if fields.len() == 2 => {
                    reg.ensure(num(fields[1])?);
                }
                "D" if fields.len() == 4 => {
                    let n = num(fields[1])?;
                    let v = bit(fields[2])?;
                    let settle = num(fields[3])?;
                    if reg.diagonal.halts.insert(n, (v, settle)).is_some() {
                        return Err(err(format!("duplicate diagonal entry for {n}")));
                    }
                }
                "F" if fields.len() == 5 || fields.len() == 6 => {
                    let e = num(fields[1])?;
                    let n = num(fields[2])?;
                    let settle = num(fields[3])?;
                    let output = bit(fields[4])?;
                    let mut constraints = Vec::new();
                    if let Some(list) = fields.get(5) {
                        for item in list.split(',').filter(|s| !s.is_empty()) {
                            let parts: Vec<&str> = item.split(':').collect();
                            let [pos, side, b] = parts[..] else {
                                return Err(err(format!("bad constraint {item:?}")));
                            };
                            let side = match side {
                                "G" => Side::G,
                                "C" => Side::C,
                                _ => return Err(err(format!("bad side {side:?}"))),
                            };
                            constraints.push(Constraint {
                                pos: num(pos)?,
                                side,
                                bit: bit(b)?,
                            });
                        }
                    }
                    reg.ensure(e).push(Entry::new(n, constraints, settle, output));
                }
                _ => return Err(err(format!("unrecognised line {content:?}"))),
            }
        }
        if !saw_s {
            return Err(Error::Parse {
                line: 0,
                msg: "missing S line".into(),
            });
        }
        reg.validated()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("S {}\n", self.s_max);
        for table in self.functionals.values() {
            let _ = writeln!(out, "E {}", table.index);
            for entry in &table.entries {
                let cs: Vec<String> = entry
                    .constraints
                    .iter()
                    .map(|k| {
                        format!(
                            "{}:{}:{}",
                            k.pos,
                            if k.side == Side::G { "G" } else { "C" },
                            u8::from(k.bit)
                        )
                    })
                    .collect();
                let _ = write!(
                    out,
                    "F {} {} {} {}",
                    table.index,
                    entry.input,
                    entry.settle,
                    u8::from(entry.output)
                );
                if !cs.is_empty() {
                    let _ = write!(out, " {}", cs.join(","));
                }
                out.push('\n');
            }
        }
        for (n, (v, settle)) in &self.diagonal.halts {
            let _ = writeln!(out, "D {n} {} {settle}", u8::from(*v));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn single_entry() -> Registry {
        let mut reg = Registry::new(4, 5);
        reg.add(FunctionalTable::with_entries(
            0,
            vec![Entry::new(0, vec![Constraint::g(0, true)], 2, true)],
        ));
        reg
    }

    #[test]
    fn empty_table_diverges() {
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::new(7));
        for n in 0..5 {
            assert_eq!(
                reg.eval(7, &bs("1111"), &bs("0000"), n, 3).unwrap(),
                Computation::DivergentSoFar
            );
        }
        assert_eq!(reg.eval(8, &bs(""), &bs(""), 0, 0), Err(Error::UnknownFunctional(8)));
    }

    #[test]
    fn settle_stage_gates_halting() {
        let reg = single_entry();
        let g = bs("1000");
        let c = bs("0000");
        assert_eq!(reg.eval(0, &g, &c, 0, 2).unwrap(), Computation::Halt(true));
        assert_eq!(reg.eval(0, &g, &c, 0, 1).unwrap(), Computation::DivergentSoFar);
        assert_eq!(reg.eval(0, &bs("0"), &c, 0, 5).unwrap(), Computation::DivergentSoFar);
        assert!(reg.eval(0, &g, &c, 0, 6).is_err());
    }

    #[test]
    fn diagonal_lookup() {
        let mut reg = Registry::new(4, 3);
        reg.diagonal.insert(3, true, 1);
        assert_eq!(reg.diag(3, 1), Computation::Halt(true));
        assert_eq!(reg.diag(3, 0), Computation::DivergentSoFar);
        assert_eq!(reg.diag(5, 3), Computation::DivergentSoFar);
    }

    #[test]
    fn conflicting_entries_are_reported() {
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::with_entries(
            0,
            vec![
                Entry::new(0, vec![Constraint::g(0, true)], 1, false),
                Entry::new(0, vec![Constraint::g(1, true)], 1, true),
                Entry::new(0, vec![Constraint::g(0, false), Constraint::g(1, false)], 1, true),
            ],
        ));
        let v = reg.validate();
        assert_eq!(
            v,
            vec![Violation::Conflict {
                functional: 0,
                input: 0,
                first: 0,
                second: 1
            }]
        );
        assert!(Registry::new(0, 0).validate().is_empty());
    }

    #[test]
    fn out_of_range_and_zero_settle() {
        let mut reg = Registry::new(2, 3);
        reg.add(FunctionalTable::with_entries(
            1,
            vec![Entry::new(0, vec![Constraint::c(2, true)], 1, false)],
        ));
        reg.diagonal.insert(0, false, 0);
        assert_eq!(reg.validate().len(), 2);
    }

    #[test]
    fn registry_text_roundtrip() {
        let text = "S 4\n# comment\nF 0 0 2 1 0:G:1,3:C:0\nF 0 1 1 0\nD 3 1 1\n";
        let reg = Registry::parse(text, 4).unwrap();
        assert_eq!(reg.s_max, 4);
        assert_eq!(reg.functional(0).unwrap().entries.len(), 2);
        assert_eq!(Registry::parse(&reg.to_text(), 4).unwrap(), reg);
        assert!(Registry::parse("F 0 0 1 1\n", 4).is_err());
        assert!(Registry::parse("S 2\nF 0 0 1 1 9:G:1\n", 4).is_err());
        assert!(Registry::parse("S 2\nX\n", 4).is_err());
    }
}
