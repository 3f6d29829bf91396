//! Mathias conditions, tree-forcing conditions, and the extension,
//! satisfaction and forcing relations between them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitvec::{BitString, GroundSets};
use crate::error::{Error, Result};
use crate::oracle::{Computation, Side};
use crate::ptree::{is_partition_code, Layout, PartitionTree};
use crate::scope::{Pair, Scope};

/// A stem together with a reservoir over the whole universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathiasCondition {
    pub stem: BitString,
    pub reservoir: BitString,
}

impl MathiasCondition {
    pub fn new(stem: BitString, reservoir: BitString) -> Result<Self> {
        if stem.len() > reservoir.len() {
            return Err(Error::Length(format!(
                "stem of length {} exceeds reservoir of length {}",
                stem.len(),
                reservoir.len()
            )));
        }
        Ok(MathiasCondition { stem, reservoir })
    }

    /// `X/σ`.
    pub fn overwritten(&self) -> BitString {
        self.reservoir.overwrite(&self.stem).expect("checked on construction")
    }
}

/// `(τ, Y) ≤ (σ, X)`: `σ ⪯ τ` and `Y/τ ⊆ X/σ`.
pub fn mathias_extends(d: &MathiasCondition, c: &MathiasCondition) -> bool {
    c.stem.is_prefix_of(&d.stem) && d.overwritten().subset_leq(&c.overwritten())
}

/// `k` stems and a class of ordered `k`-partitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub stems: Vec<BitString>,
    pub tree: PartitionTree,
}

impl Condition {
    /// `(1, ε, {ω})`.
    pub fn initial(layout: &Layout) -> Self {
        Condition {
            stems: vec![BitString::new()],
            tree: PartitionTree::full(1, layout.cells()),
        }
    }

    pub fn new(stems: Vec<BitString>, tree: PartitionTree) -> Self {
        Condition { stems, tree }
    }

    pub fn k(&self) -> usize {
        self.stems.len()
    }

    /// Part `part` of path `x`, as a set of positions.
    pub fn reservoir(&self, x: &BitString, part: usize, layout: &Layout) -> BitString {
        layout.expand(x, self.k(), part)
    }

    /// The Mathias condition of part `part` along path `x`.
    pub fn mathias(&self, x: &BitString, part: usize, layout: &Layout) -> MathiasCondition {
        MathiasCondition {
            stem: self.stems[part].clone(),
            reservoir: self.reservoir(x, part, layout),
        }
    }

    /// Distinct `X_part/σ_part` over the full-depth paths.
    pub fn overwritten_reservoirs(&self, part: usize, layout: &Layout) -> BTreeSet<BitString> {
        self.tree
            .paths()
            .map(|x| {
                self.reservoir(x, part, layout)
                    .overwrite(&self.stems[part])
                    .expect("validated stems fit the universe")
            })
            .collect()
    }

    pub fn validate(&self, layout: &Layout) -> Result<()> {
        let k = self.k();
        if k == 0 || self.tree.k() != k {
            return Err(Error::Inconsistent(format!(
                "{k} stems for a tree of {} parts",
                self.tree.k()
            )));
        }
        if self.tree.depth() != layout.cells() {
            return Err(Error::Inconsistent(format!(
                "tree depth {} but the layout has {} cells",
                self.tree.depth(),
                layout.cells()
            )));
        }
        if let Some(i) = self.stems.iter().position(|s| s.len() > layout.universe()) {
            return Err(Error::Length(format!("stem {i} is longer than the universe")));
        }
        if self.tree.is_empty() {
            return Err(Error::Inconsistent("empty class".into()));
        }
        for node in self.tree.nodes() {
            if !is_partition_code(node, k)? {
                return Err(Error::Inconsistent(format!("node {node} leaves a cell uncovered")));
            }
        }
        Ok(())
    }
}

/// `f : m → k`, sending each new part to the old part it refines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionWitness(pub Vec<usize>);

impl ExtensionWitness {
    pub fn identity(k: usize) -> Self {
        ExtensionWitness((0..k).collect())
    }

    pub fn constant(m: usize, target: usize) -> Self {
        ExtensionWitness(vec![target; m])
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `outer ∘ self`: new parts through `self`, then through `outer`.
    pub fn then(&self, outer: &ExtensionWitness) -> ExtensionWitness {
        ExtensionWitness(self.0.iter().map(|&i| outer.0[i]).collect())
    }
}

/// Does `d` extend `c` via `f`? For every path `Y` of `d` and every part `i`,
/// some path `X` of `c` has `(τ_i, Y_i) ≤ (σ_{f(i)}, X_{f(i)})`.
///
/// The path `X` may depend on the part: the crossed classes built from `S_p`
/// intersect parts of different paths.
pub fn extends(d: &Condition, c: &Condition, f: &ExtensionWitness, layout: &Layout) -> bool {
    if f.len() != d.k() || f.0.iter().any(|&j| j >= c.k()) {
        return false;
    }
    (0..d.k()).all(|i| {
        let j = f.get(i);
        if !c.stems[j].is_prefix_of(&d.stems[i]) {
            return false;
        }
        let old = c.overwritten_reservoirs(j, layout);
        d.overwritten_reservoirs(i, layout)
            .iter()
            .all(|y| old.iter().any(|x| y.subset_leq(x)))
    })
}

/// Does `g` satisfy the Mathias condition of part `part` along some path?
pub fn satisfies_on_part(g: &BitString, c: &Condition, part: usize, layout: &Layout) -> bool {
    let stem = &c.stems[part];
    stem.is_prefix_of(g)
        && c
            .overwritten_reservoirs(part, layout)
            .iter()
            .any(|x| g.subset_leq(x))
}

/// Smallest part that `g` satisfies.
pub fn satisfies(g: &BitString, c: &Condition, layout: &Layout) -> Option<usize> {
    (0..c.k()).find(|&i| satisfies_on_part(g, c, i, layout))
}

/// `|σ_i ∩ A| ≥ m` and `|σ_i ∩ Ā| ≥ m`.
pub fn forces_qm(c: &Condition, part: usize, grounds: &GroundSets, m: usize) -> Result<bool> {
    let stem = c.stems.get(part).ok_or(Error::PartOutOfRange {
        part,
        parts: c.k(),
    })?;
    let in_a = stem.ones_positions().filter(|&x| grounds.a.get(x)).count();
    let in_abar = stem.count_ones() - in_a;
    Ok(in_a >= m && in_abar >= m)
}

/// Outcome of `R_{e,i}` on one set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RWitness {
    /// `Φ_e^{(G∩A)⊕C}(n)↓ = Φ_n(n)↓`.
    HitA { n: usize },
    /// `Φ_i^{(G∩Ā)⊕C}(n)↓ = Φ_n(n)↓`.
    HitAbar { n: usize },
    /// `Φ_e^{(G∩A)⊕C}(n)` does not halt by the stage budget.
    PartialA { n: usize },
    PartialAbar { n: usize },
}

/// Checks `R_{e,i}` for `g` on the tested inputs. `None` means `g` fails:
/// both functionals halt everywhere and never hit the diagonal.
pub fn r_witness(g: &BitString, pair: Pair, scope: &Scope<'_>) -> Result<Option<RWitness>> {
    let reg = scope.registry;
    let c = &scope.grounds.c;
    let g_a = g.and(&scope.grounds.a);
    let g_abar = g.and(&scope.grounds.a_complement());
    for (e, oracle, hit, partial) in [
        (pair.e, &g_a, RWitness::HitA { n: 0 }, RWitness::PartialA { n: 0 }),
        (pair.i, &g_abar, RWitness::HitAbar { n: 0 }, RWitness::PartialAbar { n: 0 }),
    ] {
        for n in scope.domain() {
            let out = reg.eval_final(e, oracle, c, n)?;
            match out {
                Computation::DivergentSoFar => return Ok(Some(with_n(partial, n))),
                Computation::Halt(v) if reg.diag_value(n) == Some(v) => return Ok(Some(with_n(hit, n))),
                Computation::Halt(_) => {}
            }
        }
    }
    Ok(None)
}

fn with_n(w: RWitness, n: usize) -> RWitness {
    match w {
        RWitness::HitA { .. } => RWitness::HitA { n },
        RWitness::HitAbar { .. } => RWitness::HitAbar { n },
        RWitness::PartialA { .. } => RWitness::PartialA { n },
        RWitness::PartialAbar { .. } => RWitness::PartialAbar { n },
    }
}

/// A set satisfying `c` on part `part` that fails `R_{e,i}`, if one exists.
///
/// Searches, for each reservoir, for one table entry per functional and
/// input whose constraints are jointly realizable inside the reservoir.
/// The least set realizing them is then checked directly.
pub fn r_counterexample(c: &Condition, part: usize, pair: Pair, scope: &Scope<'_>) -> Result<Option<BitString>> {
    if part >= c.k() {
        return Err(Error::PartOutOfRange { part, parts: c.k() });
    }
    let reg = scope.registry;
    let n_univ = scope.universe();
    let a = &scope.grounds.a;
    let cset = &scope.grounds.c;
    let stem = &c.stems[part];
    let s = stem.len();

    for reservoir in c.overwritten_reservoirs(part, &scope.layout) {
        // One slot per (functional, input); each slot lists realizable
        // entries as (position, bit) requirements beyond the stem.
        let mut slots: Vec<Vec<Vec<(usize, bool)>>> = Vec::new();
        let mut dead = false;
        'slots: for (func, in_a) in [(pair.e, true), (pair.i, false)] {
            let table = reg.functional(func)?;
            for n in scope.domain() {
                let diag = reg.diag_value(n);
                let mut options = Vec::new();
                'entries: for entry in table.entries.iter().filter(|en| en.input == n) {
                    if entry.settle > reg.s_max || diag == Some(entry.output) {
                        continue;
                    }
                    let mut req = Vec::new();
                    for k in &entry.constraints {
                        let visible = k.pos < n_univ && a.get(k.pos) == in_a;
                        match k.side {
                            Side::C => {
                                if cset.get(k.pos) != k.bit {
                                    continue 'entries;
                                }
                            }
                            Side::G if !visible => {
                                if k.bit {
                                    continue 'entries;
                                }
                            }
                            Side::G if k.pos < s => {
                                if stem.get(k.pos) != k.bit {
                                    continue 'entries;
                                }
                            }
                            Side::G => {
                                if k.bit && !reservoir.get(k.pos) {
                                    continue 'entries;
                                }
                                req.push((k.pos, k.bit));
                            }
                        }
                    }
                    options.push(req);
                }
                if options.is_empty() {
                    dead = true;
                    break 'slots;
                }
                slots.push(options);
            }
        }
        if dead {
            continue;
        }
        slots.sort_by_key(Vec::len);
        let mut assign: Vec<Option<bool>> = vec![None; n_univ];
        if assign_slots(&slots, 0, &mut assign) {
            let mut g = stem.padded(n_univ);
            for (x, bit) in assign.iter().enumerate() {
                if *bit == Some(true) {
                    g.set(x, true);
                }
            }
            if r_witness(&g, pair, scope)?.is_none() {
                return Ok(Some(g));
            }
            return Err(Error::Inconsistent(format!(
                "registry entries for the pair ({}, {}) disagree with evaluation",
                pair.e, pair.i
            )));
        }
    }
    Ok(None)
}

fn assign_slots(slots: &[Vec<Vec<(usize, bool)>>], at: usize, assign: &mut Vec<Option<bool>>) -> bool {
    let Some(options) = slots.get(at) else {
        return true;
    };
    for req in options {
        if req.iter().any(|&(x, b)| assign[x].is_some_and(|v| v != b)) {
            continue;
        }
        let fresh: Vec<usize> = req.iter().filter(|&&(x, _)| assign[x].is_none()).map(|&(x, _)| x).collect();
        for &(x, b) in req {
            assign[x] = Some(b);
        }
        if assign_slots(slots, at + 1, assign) {
            return true;
        }
        for x in fresh {
            assign[x] = None;
        }
    }
    false
}

/// Every set satisfying `c` on part `part` meets `R_{e,i}` on the tested inputs.
pub fn forces_r_at_horizon(c: &Condition, part: usize, pair: Pair, scope: &Scope<'_>) -> Result<bool> {
    Ok(r_counterexample(c, part, pair, scope)?.is_none())
}

/// `U(c)`: parts on which `c` does not force `R_{e,i}`.
pub fn unforced_parts(c: &Condition, pair: Pair, scope: &Scope<'_>) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for j in 0..c.k() {
        if !forces_r_at_horizon(c, j, pair, scope)? {
            out.insert(j);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Entry, FunctionalTable, Registry};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn mathias_examples() {
        let c = MathiasCondition::new(bs("1"), bs("1111")).unwrap();
        let d = MathiasCondition::new(bs("10"), bs("1011")).unwrap();
        assert!(mathias_extends(&c, &c));
        assert!(mathias_extends(&d, &c));
        assert!(!mathias_extends(&c, &d));
        assert!(MathiasCondition::new(bs("10101"), bs("1")).is_err());
    }

    #[test]
    fn initial_condition_extends_itself() {
        let layout = Layout::plain(4);
        let c = Condition::initial(&layout);
        c.validate(&layout).unwrap();
        assert!(extends(&c, &c, &ExtensionWitness::identity(1), &layout));
    }

    #[test]
    fn padded_stem_satisfies_full_tree() {
        let layout = Layout::plain(4);
        let mut c = Condition::initial(&layout);
        c.stems[0] = bs("10");
        assert_eq!(satisfies(&bs("1000"), &c, &layout), Some(0));
        assert_eq!(satisfies(&bs("1011"), &c, &layout), Some(0));
        assert_eq!(satisfies(&bs("0100"), &c, &layout), None);
    }

    #[test]
    fn qm_counts() {
        let g = GroundSets::new(bs("1100"), bs("0000")).unwrap();
        let layout = Layout::plain(4);
        let mut c = Condition::initial(&layout);
        c.stems[0] = bs("1101");
        assert!(!forces_qm(&c, 0, &g, 2).unwrap());
        let g = GroundSets::new(bs("1010"), bs("0000")).unwrap();
        c.stems[0] = bs("1111");
        assert!(forces_qm(&c, 0, &g, 2).unwrap());
        assert!(forces_qm(&c, 1, &g, 2).is_err());
    }

    #[test]
    fn witness_composition() {
        let f = ExtensionWitness(vec![0, 0, 1]);
        let g = ExtensionWitness(vec![2, 1, 0, 2]);
        assert_eq!(g.then(&f).0, vec![1, 0, 0, 1]);
        assert_eq!(ExtensionWitness::constant(3, 0).0, vec![0, 0, 0]);
    }

    #[test]
    fn empty_tables_force_everything() {
        let grounds = GroundSets::new(bs("1010"), bs("0110")).unwrap();
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::new(0));
        reg.add(FunctionalTable::new(1));
        let scope = Scope::new(&reg, &grounds, 4, 1);
        let c = Condition::initial(&scope.layout);
        assert!(forces_r_at_horizon(&c, 0, Pair::new(0, 1), &scope).unwrap());
    }

    #[test]
    fn total_correct_pair_is_not_forced() {
        // Both functionals output 1 - diag everywhere: every G fails.
        let grounds = GroundSets::new(bs("1010"), bs("0110")).unwrap();
        let mut reg = Registry::new(4, 3);
        reg.diagonal.insert(0, true, 1).insert(1, false, 1);
        for e in 0..2 {
            reg.add(FunctionalTable::with_entries(
                e,
                vec![Entry::new(0, vec![], 1, false), Entry::new(1, vec![], 1, true)],
            ));
        }
        let scope = Scope::new(&reg, &grounds, 4, 1);
        let c = Condition::initial(&scope.layout);
        let g = r_counterexample(&c, 0, Pair::new(0, 1), &scope).unwrap().unwrap();
        assert_eq!(g, bs("0000"));
        assert!(unforced_parts(&c, Pair::new(0, 1), &scope).unwrap().contains(&0));
    }
}
