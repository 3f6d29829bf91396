//! Acceptable parts: parts whose reservoir meets both `A` and `Ā` often
//! enough, the greedy search that finds one, forcing `Q_m` on it, and the
//! pruning procedure that reads `A` off a class whose parts settle on one
//! side.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitvec::{code_bit, BitString, GroundSets};
use crate::error::{Error, Result};
use crate::forcing::Condition;
use crate::ptree::{Layout, PartitionTree, RefineMode};

fn side_counts(r: &BitString, from: usize, a: &BitString) -> (usize, usize) {
    let mut in_a = 0;
    let mut in_abar = 0;
    for x in r.ones_positions().filter(|&x| x >= from) {
        if a.get(x) {
            in_a += 1;
        } else {
            in_abar += 1;
        }
    }
    (in_a, in_abar)
}

/// Parts `i` such that along some path, the reservoir beyond `σ_i` holds at
/// least `t` elements of `A` and at least `t` of `Ā`.
pub fn acceptable_parts(c: &Condition, grounds: &GroundSets, layout: &Layout, t: usize) -> BTreeSet<usize> {
    (0..c.k())
        .filter(|&i| {
            let from = c.stems[i].len();
            c.tree.paths().any(|x| {
                let (na, nb) = side_counts(&c.reservoir(x, i, layout), from, &grounds.a);
                na >= t && nb >= t
            })
        })
        .collect()
}

/// Result of the greedy search for an acceptable part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptableFind {
    pub part: usize,
    pub path: BitString,
    /// Part that received each segment, in order.
    pub segments: Vec<usize>,
    /// Segments that went to `part`.
    pub count: usize,
}

/// Builds `ρ^0 ⪯ ρ^1 ⪯ …` along paths of the class, each segment adding an
/// element of `A` and one of `Ā` to some part, always taking the shortest
/// available segment. Returns the part that received the most segments if
/// it received at least `t`.
pub fn find_acceptable_part(
    c: &Condition,
    grounds: &GroundSets,
    layout: &Layout,
    t: usize,
) -> Option<AcceptableFind> {
    let k = c.k();
    let n = layout.universe();
    let a = &grounds.a;
    // Expanded parts of every path.
    let mut alive: Vec<(&BitString, Vec<BitString>)> = c
        .tree
        .paths()
        .map(|x| (x, (0..k).map(|i| c.reservoir(x, i, layout)).collect()))
        .collect();
    let mut pos = 0;
    let mut segments = Vec::new();
    loop {
        // Shortest segment end over (path, part); ties to the smallest part,
        // then the first path in lexicographic order.
        let mut best: Option<(usize, usize, usize)> = None;
        for (pi, (_, parts)) in alive.iter().enumerate() {
            for (i, r) in parts.iter().enumerate() {
                let start = pos.max(c.stems[i].len());
                let (mut seen_a, mut seen_b) = (false, false);
                for x in start..n {
                    if r.get(x) {
                        if a.get(x) {
                            seen_a = true;
                        } else {
                            seen_b = true;
                        }
                    }
                    if seen_a && seen_b {
                        let end = x + 1;
                        if best.is_none_or(|(e, bi, _)| (end, i) < (e, bi)) {
                            best = Some((end, i, pi));
                        }
                        break;
                    }
                }
            }
        }
        let Some((end, part, pi)) = best else {
            break;
        };
        segments.push(part);
        let chosen: Vec<BitString> = alive[pi].1.iter().map(|r| r.prefix(end)).collect();
        alive.retain(|(_, parts)| parts.iter().zip(&chosen).all(|(r, ch)| ch.is_prefix_of(r)));
        pos = end;
    }
    let mut counts = vec![0usize; k];
    for &s in &segments {
        counts[s] += 1;
    }
    let (part, &count) = counts
        .iter()
        .enumerate()
        .max_by(|(i, x), (j, y)| x.cmp(y).then(j.cmp(i)))?;
    if count < t.max(1) {
        return None;
    }
    let path = alive.first()?.0.clone();
    Some(AcceptableFind {
        part,
        path,
        segments,
        count,
    })
}

/// Replaces `σ_i` by the shortest (then lexicographically least) `τ ⪰ σ_i`
/// with `τ ≺ X_i/σ_i` for some path `X` and at least `m` elements of both `A`
/// and `Ā`, keeping only the paths that admit `τ`.
pub fn force_qm_extension(
    c: &Condition,
    part: usize,
    grounds: &GroundSets,
    layout: &Layout,
    m: usize,
) -> Result<Condition> {
    if part >= c.k() {
        return Err(Error::PartOutOfRange { part, parts: c.k() });
    }
    let stem = &c.stems[part];
    let a = &grounds.a;
    let mut best: Option<BitString> = None;
    for r in c.overwritten_reservoirs(part, layout) {
        let (mut na, mut nb) = (0, 0);
        let mut len = None;
        for x in 0..r.len() {
            if x >= stem.len() && na >= m && nb >= m {
                len = Some(x);
                break;
            }
            if r.get(x) {
                if a.get(x) {
                    na += 1;
                } else {
                    nb += 1;
                }
            }
        }
        if len.is_none() && na >= m && nb >= m {
            len = Some(r.len().max(stem.len()));
        }
        let Some(len) = len else { continue };
        let tau = r.prefix(len.max(stem.len()));
        if best
            .as_ref()
            .is_none_or(|b| (tau.len(), &tau) < (b.len(), b))
        {
            best = Some(tau);
        }
    }
    let tau = best.ok_or_else(|| Error::NoExtension {
        part,
        why: format!("no reservoir holds {m} elements of both A and its complement"),
    })?;
    let tree = c.tree.refine_below(part, &tau, stem, RefineMode::Prefix, layout)?;
    let mut stems = c.stems.clone();
    stems[part] = tau;
    Ok(Condition::new(stems, tree))
}

/// Outcome of reading one bit of `A` off a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Bit(bool),
    Undetermined,
}

/// Splits the parts of a tree into those that, beyond position `from`, only
/// ever meet `A` and those that only ever meet `Ā`. Parts meeting both
/// along some path, or neither along every path, are left out.
pub fn claim_classification(tree: &PartitionTree, a: &BitString, from: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let k = tree.k();
    let cells = tree.depth();
    let mut s_a = BTreeSet::new();
    let mut s_abar = BTreeSet::new();
    for m in 0..k {
        let mut meets_a = false;
        let mut meets_abar = false;
        for x in tree.paths() {
            for cell in from..cells {
                if code_bit(x, k, cell, m) {
                    if a.get(cell) {
                        meets_a = true;
                    } else {
                        meets_abar = true;
                    }
                }
            }
        }
        match (meets_a, meets_abar) {
            (true, false) => {
                s_a.insert(m);
            }
            (false, true) => {
                s_abar.insert(m);
            }
            _ => {}
        }
    }
    (s_a, s_abar)
}

/// Decides whether `n ∈ A` from a tree whose parts in `s_a` lie inside `A`
/// and whose parts in `s_abar` lie inside `Ā` (cells are positions).
///
/// Lists the level-`n+1` nodes putting `n` into an `s_a` part (`L_A`) or an
/// `s_abar` part (`L_Ā`), drops nodes with no descendant at `search_depth`,
/// and answers once exactly one list is empty.
pub fn compute_a_from_c(
    tree: &PartitionTree,
    s_a: &BTreeSet<usize>,
    s_abar: &BTreeSet<usize>,
    n: usize,
    search_depth: usize,
) -> Result<Membership> {
    let level = n + 1;
    if search_depth < level || level > tree.depth() {
        return Ok(Membership::Undetermined);
    }
    let depth = search_depth.min(tree.depth());
    let k = tree.k();
    let survives = |rho: &BitString| tree.descendants_at(rho, depth).any(|d| rho.is_prefix_of(d));
    let mut l_a = 0usize;
    let mut l_abar = 0usize;
    for rho in tree.level(level) {
        if !survives(rho) {
            continue;
        }
        if s_a.iter().any(|&m| code_bit(rho, k, n, m)) {
            l_a += 1;
        }
        if s_abar.iter().any(|&m| code_bit(rho, k, n, m)) {
            l_abar += 1;
        }
    }
    match (l_a, l_abar) {
        (0, 0) => Err(Error::Inconsistent(format!(
            "neither list survives at depth {depth} for n = {n}"
        ))),
        (_, 0) => Ok(Membership::Bit(true)),
        (0, _) => Ok(Membership::Bit(false)),
        _ => Ok(Membership::Undetermined),
    }
}
