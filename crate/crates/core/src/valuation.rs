//! Valuations, correctness, incompatibility, and disagreement.
//!
//! A condition disagrees with a valuation `p` on a set of parts `U` when every
//! path of its class, split part by part into two halves, admits some halting
//! computation that contradicts `p`. The paths that survive form the class
//! `S_p`, built here as a partition tree with twice as many parts. Part `j`
//! of a condition splits into halves `2j` (read by `Φ_e` through `A`) and
//! `2j + 1` (read by `Φ_i` through `Ā`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitvec::{code_bit, BitString};
use crate::error::{Error, Result};
use crate::forcing::Condition;
use crate::oracle::{Registry, Side};
use crate::ptree::PartitionTree;
use crate::scope::{Pair, Scope};

/// Finite partial function `ω → 2`. Text form `{n:bit,…}`, ascending `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, )]
pub struct Valuation(pub BTreeMap<usize, bool>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, bool)>>(pairs: I) -> Self {
        Valuation(pairs.into_iter().collect())
    }

    pub fn get(&self, n: usize) -> Option<bool> {
        self.0.get(&n).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No `n` in the domain has `p(n) = Φ_n(n)↓` at the stage budget.
    pub fn is_correct(&self, reg: &Registry) -> bool {
        self.0.iter().all(|(&n, &v)| reg.diag_value(n) != Some(v))
    }

    /// Every `n` in the domain has `Φ_n(n)↓ ≠ p(n)` at the stage budget.
    pub fn is_strictly_correct(&self, reg: &Registry) -> bool {
        self.0.iter().all(|(&n, &v)| reg.diag_value(n) == Some(!v))
    }

    pub fn incompatible(&self, other: &Valuation) -> bool {
        self.0
            .iter()
            .any(|(n, v)| other.0.get(n).is_some_and(|w| w != v))
    }

    /// All `2^|domain|` valuations on `domain`, lexicographic in the values.
    pub fn all_on(domain: &[usize]) -> Vec<Valuation> {
        let m = domain.len();
        (0u64..(1 << m))
            .map(|v| {
                Valuation::from_pairs(
                    domain
                        .iter()
                        .enumerate()
                        .map(|(i, &n)| (n, v >> (m - 1 - i) & 1 == 1)),
                )
            })
            .collect()
    }

    /// Every valuation with domain inside `0..=bound`, ordered by domain
    /// size, then domain, then values.
    pub fn canonical_up_to(bound: usize) -> Vec<Valuation> {
        let universe: Vec<usize> = (0..=bound).collect();
        let mut domains: Vec<Vec<usize>> = (0u64..(1 << universe.len()))
            .map(|mask| {
                universe
                    .iter()
                    .copied()
                    .filter(|&n| mask >> n & 1 == 1)
                    .collect()
            })
            .collect();
        domains.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        domains.iter().flat_map(|d| Valuation::all_on(d)).collect()
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Valuation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            msg: format!("bad valuation {s:?}"),
        };
        let inner = s.trim().strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or_else(bad)?;
        let mut out = Valuation::new();
        for item in inner.split(',').filter(|i| !i.trim().is_empty()) {
            let (n, v) = item.split_once(':').ok_or_else(bad)?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            let v = match v.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            if out.0.insert(n, v).is_some() {
                return Err(bad());
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .0
            .iter()
            .map(|(n, v)| format!("{n}:{}", u8::from(*v)))
            .collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Does `Φ_e^{ρ ⊕ C}` disagree with `p` on `x`? Returns a witness `(Y, n)`
/// with `Y ⊆ x` and `Φ_e^{(Y/ρ ∩ mask) ⊕ C}(n)↓ ≠ p(n)`.
///
/// Scans the table for an entry that some `Y` can trigger, instead of
/// enumerating subsets of `x`.
pub fn functional_disagrees(
    reg: &Registry,
    e: usize,
    rho: &BitString,
    x: &BitString,
    p: &Valuation,
    mask: &BitString,
    c_side: &BitString,
) -> Result<Option<(BitString, usize)>> {
    if rho.len() > x.len() {
        return Err(Error::Length("stem longer than the reservoir".into()));
    }
    let table = reg.functional(e)?;
    'entries: for entry in &table.entries {
        let Some(want) = p.get(entry.input) else {
            continue;
        };
        if entry.output == want || entry.settle > reg.s_max {
            continue;
        }
        let mut ones = BTreeSet::new();
        let mut zeros = BTreeSet::new();
        for k in &entry.constraints {
            match k.side {
                Side::C => {
                    if c_side.get(k.pos) != k.bit {
                        continue 'entries;
                    }
                }
                Side::G if k.pos < rho.len() => {
                    if (rho.get(k.pos) && mask.get(k.pos)) != k.bit {
                        continue 'entries;
                    }
                }
                Side::G if k.bit => {
                    if !(x.get(k.pos) && mask.get(k.pos)) {
                        continue 'entries;
                    }
                    ones.insert(k.pos);
                }
                Side::G => {
                    zeros.insert(k.pos);
                }
            }
        }
        if ones.iter().any(|p| zeros.contains(p)) {
            continue;
        }
        return Ok(Some((
            BitString::from_positions(x.len(), ones),
            entry.input,
        )));
    }
    Ok(None)
}

/// Which half of a split part a computation reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Half {
    /// Half `2j`, read by `Φ_e` through `A`.
    Low,
    /// Half `2j + 1`, read by `Φ_i` through `Ā`.
    High,
}

impl Half {
    pub fn offset(self) -> usize {
        match self {
            Half::Low => 0,
            Half::High => 1,
        }
    }
}

/// A table entry that contradicts the valuation and fires as soon as the
/// listed cells all lie in the given half of part `part`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Need {
    pub part: usize,
    pub half: Half,
    pub n: usize,
    /// Position of the entry within its table.
    pub entry: usize,
    /// Positions at or beyond the stem that must hold 1.
    pub ones: Vec<usize>,
    /// Positions at or beyond the stem that must hold 0.
    pub zeros: Vec<usize>,
    pub cells: Vec<usize>,
}

impl Need {
    /// Fires in split code `z` (2k parts, position-major).
    pub fn fires(&self, z: &BitString, k: usize) -> bool {
        let t = 2 * self.part + self.half.offset();
        self.cells.iter().all(|&c| code_bit(z, 2 * k, c, t))
    }
}

/// Every entry that could contradict `p` on a part in `u`, with the cells it
/// needs. Entries that no split can trigger are dropped.
pub fn disagreement_needs(
    c: &Condition,
    p: &Valuation,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
) -> Result<Vec<Need>> {
    let reg = scope.registry;
    let a = &scope.grounds.a;
    let cset = &scope.grounds.c;
    let n_univ = scope.universe();
    let mut out = Vec::new();
    for &j in u {
        let sigma = &c.stems[j];
        for half in [Half::Low, Half::High] {
            let (func, in_mask): (usize, &dyn Fn(usize) -> bool) = match half {
                Half::Low => (pair.e, &|x| a.get(x)),
                Half::High => (pair.i, &|x| !a.get(x)),
            };
            let table = reg.functional(func)?;
            'entries: for (idx, entry) in table.entries.iter().enumerate() {
                let Some(want) = p.get(entry.input) else {
                    continue;
                };
                if entry.output == want || entry.settle > reg.s_max {
                    continue;
                }
                let mut ones = BTreeSet::new();
                let mut zeros = BTreeSet::new();
                for k in &entry.constraints {
                    match k.side {
                        Side::C => {
                            if cset.get(k.pos) != k.bit {
                                continue 'entries;
                            }
                        }
                        Side::G if k.pos < sigma.len() => {
                            if (sigma.get(k.pos) && in_mask(k.pos)) != k.bit {
                                continue 'entries;
                            }
                        }
                        Side::G if k.bit => {
                            if k.pos >= n_univ {
                                continue 'entries;
                            }
                            ones.insert(k.pos);
                        }
                        Side::G => {
                            zeros.insert(k.pos);
                        }
                    }
                }
                if ones.iter().any(|x| zeros.contains(x)) {
                    continue;
                }
                let cells: BTreeSet<usize> = ones.iter().map(|&x| scope.layout.cell(x)).collect();
                out.push(Need {
                    part: j,
                    half,
                    n: entry.input,
                    entry: idx,
                    ones: ones.into_iter().collect(),
                    zeros: zeros.into_iter().collect(),
                    cells: cells.into_iter().collect(),
                });
            }
        }
    }
    Ok(out)
}

/// Merges a 2k-part split back into the k-part code it refines.
pub fn merge_split(z: &BitString, k: usize) -> BitString {
    let cells = z.len() / (2 * k);
    BitString::from_bools((0..cells).flat_map(|x| {
        (0..k).map(move |j| code_bit(z, 2 * k, x, 2 * j) || code_bit(z, 2 * k, x, 2 * j + 1))
    }))
}

/// Depth-first enumeration of the splits of one node, pruning as soon as a
/// need fires on the cells decided so far.
struct SplitSearch<'n> {
    k: usize,
    /// Needs grouped by their last cell.
    by_last: Vec<Vec<&'n Need>>,
    overlap: bool,
    visited: usize,
    max_nodes: usize,
}

impl<'n> SplitSearch<'n> {
    fn new(k: usize, depth: usize, needs: &'n [Need], overlap: bool, max_nodes: usize) -> Option<Self> {
        let mut by_last = vec![Vec::new(); depth];
        for need in needs {
            match need.cells.last() {
                None => return None, // fires on every split
                Some(&c) if c < depth => by_last[c].push(need),
                Some(_) => {}
            }
        }
        Some(SplitSearch {
            k,
            by_last,
            overlap,
            visited: 0,
            max_nodes,
        })
    }

    /// Calls `sink` on every surviving split of `x` (a k-part node); stops
    /// early when `sink` returns `false`. Returns `Ok(false)` if stopped.
    fn run(&mut self, x: &BitString, sink: &mut dyn FnMut(&BitString) -> bool) -> Result<bool> {
        let depth = x.len() / self.k;
        let mut z = BitString::zeros(2 * self.k * depth);
        self.descend(x, 0, depth, &mut z, sink)
    }

    fn descend(
        &mut self,
        x: &BitString,
        cell: usize,
        depth: usize,
        z: &mut BitString,
        sink: &mut dyn FnMut(&BitString) -> bool,
    ) -> Result<bool> {
        if cell == depth {
            return Ok(sink(z));
        }
        self.visited += 1;
        if self.visited > self.max_nodes {
            return Err(Error::Budget(format!(
                "split enumeration visited more than {} nodes",
                self.max_nodes
            )));
        }
        let k = self.k;
        let parts: Vec<usize> = (0..k).filter(|&j| code_bit(x, k, cell, j)).collect();
        let options: &[(bool, bool)] = if self.overlap {
            &[(true, false), (false, true), (true, true)]
        } else {
            &[(true, false), (false, true)]
        };
        let mut choice = vec![0usize; parts.len()];
        loop {
            for (slot, &j) in parts.iter().enumerate() {
                let (lo, hi) = options[choice[slot]];
                z.set(2 * k * cell + 2 * j, lo);
                z.set(2 * k * cell + 2 * j + 1, hi);
            }
            let alive = !self.by_last[cell].iter().any(|need| need.fires(z, k));
            if alive && !self.descend(x, cell + 1, depth, z, sink)? {
                return Ok(false);
            }
            // next combination
            let mut slot = parts.len();
            loop {
                if slot == 0 {
                    for &j in &parts {
                        z.set(2 * k * cell + 2 * j, false);
                        z.set(2 * k * cell + 2 * j + 1, false);
                    }
                    return Ok(true);
                }
                slot -= 1;
                choice[slot] += 1;
                if choice[slot] < options.len() {
                    break;
                }
                choice[slot] = 0;
            }
        }
    }
}

/// The class `S_p` inspected to `depth` cells: every split of a depth-`depth`
/// node of the condition's class on which no need of `p` has fired yet.
/// At `depth == cells` this is exactly `S_p`.
pub fn build_sp_tree(
    c: &Condition,
    p: &Valuation,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
    depth: usize,
) -> Result<PartitionTree> {
    let k = c.k();
    let depth = depth.min(c.tree.depth());
    let needs = disagreement_needs(c, p, pair, u, scope)?;
    let Some(mut search) = SplitSearch::new(k, depth, &needs, true, scope.limits.max_nodes) else {
        return Ok(PartitionTree::empty(2 * k, depth));
    };
    let mut found = Vec::new();
    for x in c.tree.level(depth) {
        search.run(x, &mut |z| {
            found.push(z.clone());
            true
        })?;
    }
    PartitionTree::from_paths(2 * k, depth, found)
}

/// A disjoint split of some node at `depth` that no need fires on, if any.
pub fn sp_witness(
    c: &Condition,
    p: &Valuation,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
    depth: usize,
) -> Result<Option<BitString>> {
    let k = c.k();
    let depth = depth.min(c.tree.depth());
    let needs = disagreement_needs(c, p, pair, u, scope)?;
    // Overlapping halves only make more needs fire, so disjoint splits suffice.
    let Some(mut search) = SplitSearch::new(k, depth, &needs, false, scope.limits.max_nodes) else {
        return Ok(None);
    };
    for x in c.tree.level(depth) {
        let mut hit = None;
        search.run(x, &mut |z| {
            hit = Some(z.clone());
            false
        })?;
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

/// `c` disagrees with `p` on `u`: `S_p` is empty at `depth`.
pub fn condition_disagrees(
    c: &Condition,
    p: &Valuation,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
    depth: usize,
) -> Result<bool> {
    Ok(sp_witness(c, p, pair, u, scope, depth)?.is_none())
}

/// The valuations found to disagree with the condition, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementEnumeration {
    pub discovered: Vec<Valuation>,
    pub depth_used: usize,
}

impl DisagreementEnumeration {
    pub fn contains(&self, p: &Valuation) -> bool {
        self.discovered.contains(p)
    }
}

/// All valuations with domain inside `0..=domain_bound` whose `S_p` is empty
/// at `depth`.
pub fn enumerate_e(
    c: &Condition,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
    depth: usize,
) -> Result<DisagreementEnumeration> {
    let mut discovered = Vec::new();
    for p in Valuation::canonical_up_to(scope.domain_bound) {
        if condition_disagrees(c, &p, pair, u, scope, depth)? {
            discovered.push(p);
        }
    }
    Ok(DisagreementEnumeration {
        discovered,
        depth_used: depth.min(c.tree.depth()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Constraint, Entry, FunctionalTable};

    fn v(pairs: &[(usize, bool)]) -> Valuation {
        Valuation::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn correctness_examples() {
        let mut reg = Registry::new(4, 2);
        reg.diagonal.insert(3, true, 1);
        assert!(v(&[(3, false)]).is_correct(&reg));
        assert!(!v(&[(3, true)]).is_correct(&reg));
        assert!(v(&[(0, true), (1, false)]).is_correct(&reg));
        assert!(!v(&[(0, true)]).is_strictly_correct(&reg));
        assert!(v(&[(3, false)]).is_strictly_correct(&reg));
    }

    #[test]
    fn correctness_is_antitone_in_the_diagonal() {
        let mut reg = Registry::new(4, 2);
        let p = v(&[(0, true), (1, false)]);
        assert!(p.is_correct(&reg));
        reg.diagonal.insert(1, true, 1);
        assert!(p.is_correct(&reg));
        reg.diagonal.insert(0, true, 2);
        assert!(!p.is_correct(&reg));
    }

    #[test]
    fn incompatibility_examples() {
        assert!(v(&[(0, false)]).incompatible(&v(&[(0, true)])));
        assert!(!v(&[(0, false)]).incompatible(&v(&[(1, true)])));
        let all = Valuation::all_on(&[2, 5, 7]);
        assert_eq!(all.len(), 8);
        for (a, p) in all.iter().enumerate() {
            for q in &all[a + 1..] {
                assert!(p.incompatible(q));
            }
        }
    }

    #[test]
    fn canonical_order() {
        let all = Valuation::canonical_up_to(1);
        let shown: Vec<String> = all.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            ["{}", "{0:0}", "{0:1}", "{1:0}", "{1:1}", "{0:0,1:0}", "{0:0,1:1}", "{0:1,1:0}", "{0:1,1:1}"]
        );
        assert_eq!(Valuation::canonical_up_to(3).len(), 81);
    }

    #[test]
    fn empty_table_never_disagrees() {
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::new(0));
        let x: BitString = "1111".parse().unwrap();
        let r = functional_disagrees(&reg, 0, &BitString::new(), &x, &v(&[(0, true)]), &x, &x).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn unconditional_entry_disagrees_with_any_y() {
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::with_entries(0, vec![Entry::new(0, vec![], 1, true)]));
        let x: BitString = "0000".parse().unwrap();
        let ones: BitString = "1111".parse().unwrap();
        let (y, n) = functional_disagrees(&reg, 0, &BitString::new(), &x, &v(&[(0, false)]), &ones, &x)
            .unwrap()
            .unwrap();
        assert_eq!(n, 0);
        assert!(y.subset_leq(&x));
        assert!(functional_disagrees(&reg, 0, &BitString::new(), &x, &v(&[(0, true)]), &ones, &x)
            .unwrap()
            .is_none());
    }

    #[test]
    fn witness_respects_stem_and_mask() {
        let mut reg = Registry::new(4, 3);
        reg.add(FunctionalTable::with_entries(
            0,
            vec![Entry::new(0, vec![Constraint::g(0, true), Constraint::g(2, true)], 1, true)],
        ));
        let p = v(&[(0, false)]);
        let c = BitString::zeros(4);
        let x: BitString = "1111".parse().unwrap();
        let all: BitString = "1111".parse().unwrap();
        // stem supplies position 0
        let (y, _) = functional_disagrees(&reg, 0, &"1".parse().unwrap(), &x, &p, &all, &c)
            .unwrap()
            .unwrap();
        assert_eq!(y.to_string(), "0010");
        // stem blocks position 0
        assert!(functional_disagrees(&reg, 0, &"0".parse().unwrap(), &x, &p, &all, &c)
            .unwrap()
            .is_none());
        // mask blocks position 2
        let mask: BitString = "1101".parse().unwrap();
        assert!(functional_disagrees(&reg, 0, &"1".parse().unwrap(), &x, &p, &mask, &c)
            .unwrap()
            .is_none());
    }

    #[test]
    fn merge_split_unions_halves() {
        let z: BitString = "1001".parse().unwrap(); // k=2, one cell: Z0=1 Z1=0 Z2=0 Z3=1
        assert_eq!(merge_split(&z, 2).to_string(), "11");
    }
}
