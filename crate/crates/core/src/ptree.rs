//! Depth-bounded partition trees: explicitly enumerated, prefix-closed sets of
//! ordered k-partition codes, together with the Cross operation on codes and
//! on trees.
//!
//! A tree is indexed by *cells*. A [`Layout`] maps each position of the
//! universe to a cell: the first `explicit` positions get a cell each, and the
//! remaining positions are grouped into at most two tail cells according to
//! their membership in `A`. With `explicit == universe` cells and positions
//! coincide.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bitvec::{code_bit, BitString};
use crate::error::{Error, Result};

/// Maps universe positions onto tree cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    universe: usize,
    explicit: usize,
    cell_of: Vec<usize>,
    cells: usize,
}

impl Layout {
    /// One cell per position below `explicit`; positions at or beyond it
    /// share an `A`-tail cell and an `Ā`-tail cell (each only if inhabited).
    pub fn new(a: &BitString, explicit: usize) -> Self {
        let universe = a.len();
        let explicit = explicit.min(universe);
        let tail_a = (explicit..universe).any(|x| a.get(x));
        let tail_abar = (explicit..universe).any(|x| !a.get(x));
        let a_cell = explicit;
        let abar_cell = explicit + usize::from(tail_a);
        let cells = explicit + usize::from(tail_a) + usize::from(tail_abar);
        let cell_of = (0..universe)
            .map(|x| {
                if x < explicit {
                    x
                } else if a.get(x) {
                    a_cell
                } else {
                    abar_cell
                }
            })
            .collect();
        Layout {
            universe,
            explicit,
            cell_of,
            cells,
        }
    }

    /// Cells and positions coincide.
    pub fn plain(universe: usize) -> Self {
        Layout {
            universe,
            explicit: universe,
            cell_of: (0..universe).collect(),
            cells: universe,
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn explicit(&self) -> usize {
        self.explicit
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn cell(&self, x: usize) -> usize {
        self.cell_of[x]
    }

    pub fn positions_of_cell(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&x| self.cell_of[x] == cell)
    }

    /// The set of positions whose cell lies in part `part` of `code`.
    pub fn expand(&self, code: &BitString, k: usize, part: usize) -> BitString {
        BitString::from_bools((0..self.universe).map(|x| code_bit(code, k, self.cell_of[x], part)))
    }

    /// Same as [`expand`](Self::expand) for a single-part cell string.
    pub fn expand_cells(&self, cells: &BitString) -> BitString {
        BitString::from_bools((0..self.universe).map(|x| cells.get(self.cell_of[x])))
    }
}

/// `true` iff every coded cell of `sigma` lies in some part.
pub fn is_partition_code(sigma: &BitString, k: usize) -> Result<bool> {
    if k == 0 || !sigma.len().is_multiple_of(k) {
        return Err(Error::Length(format!(
            "code length {} is not a multiple of {k}",
            sigma.len()
        )));
    }
    Ok((0..sigma.len() / k).all(|x| (0..k).any(|j| code_bit(sigma, k, x, j))))
}

/// Pairs `p < q < n` in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .collect()
}

/// Part index of `(j, p, q)` in the output of [`cross_codes`].
pub fn cross_part_index(j: usize, p: usize, q: usize, n: usize) -> usize {
    let rank = pairs(n).iter().position(|&pq| pq == (p, q)).expect("p < q < n");
    j * (n * (n - 1) / 2) + rank
}

/// Cross of `n ≥ 2` codes of ordered `k`-partitions: part `(j, p, q)` is the
/// intersection of part `j` of code `p` with part `j` of code `q`, parts
/// ordered lexicographically by `(j, p, q)`.
pub fn cross_codes(codes: &[BitString], k: usize) -> Result<BitString> {
    let n = codes.len();
    if n < 2 {
        return Err(Error::Mismatch(format!("cross needs at least 2 codes, got {n}")));
    }
    let len = codes[0].len();
    if k == 0 || !len.is_multiple_of(k) || codes.iter().any(|c| c.len() != len) {
        return Err(Error::Mismatch(
            "crossed codes must share k and length".into(),
        ));
    }
    let cells = len / k;
    let prs = pairs(n);
    let out_k = k * prs.len();
    let mut out = BitString::zeros(out_k * cells);
    for x in 0..cells {
        for j in 0..k {
            for (r, &(p, q)) in prs.iter().enumerate() {
                if code_bit(&codes[p], k, x, j) && code_bit(&codes[q], k, x, j) {
                    out.set(out_k * x + j * prs.len() + r, true);
                }
            }
        }
    }
    Ok(out)
}

/// How [`PartitionTree::refine_below`] compares `τ` with a reservoir.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefineMode {
    /// `τ ≺ X_i/σ`
    Prefix,
    /// `τ ⊆ X_i/σ` as finite sets
    Subset,
}

/// Finite set of full-depth codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSet {
    pub k: usize,
    pub codes: BTreeSet<BitString>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Prefix-closed set of ordered `k`-partition codes of length at most
/// `k · depth`, stored level by level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreePaths", try_from = "TreePaths")]
pub struct PartitionTree {
    k: usize,
    depth: usize,
    levels: Vec<BTreeSet<BitString>>,
}

/// Serialized form of a tree: its full-depth paths. Dead branches are dropped.
#[derive(Serialize, Deserialize)]
struct TreePaths {
    k: usize,
    depth: usize,
    paths: Vec<BitString>,
}

impl From<PartitionTree> for TreePaths {
    fn from(t: PartitionTree) -> Self {
        TreePaths {
            k: t.k,
            depth: t.depth,
            paths: t.paths().cloned().collect(),
        }
    }
}

impl TryFrom<TreePaths> for PartitionTree {
    type Error = Error;

    fn try_from(t: TreePaths) -> Result<Self> {
        if t.k == 0 {
            return Err(Error::Parse {
                line: 0,
                msg: "k must be positive".into(),
            });
        }
        PartitionTree::from_paths(t.k, t.depth, t.paths)
    }
}

impl PartitionTree {
    pub fn empty(k: usize, depth: usize) -> Self {
        assert!(k > 0, "partition trees need at least one part");
        PartitionTree {
            k,
            depth,
            levels: vec![BTreeSet::new(); depth + 1],
        }
    }

    /// Every ordered `k`-partition code up to `depth`.
    pub fn full(k: usize, depth: usize) -> Self {
        let mut t = Self::empty(k, depth);
        t.levels[0].insert(BitString::new());
        let patterns = covering_patterns(k);
        for d in 0..depth {
            let next: BTreeSet<BitString> = t.levels[d]
                .iter()
                .flat_map(|node| patterns.iter().map(move |pat| concat(node, pat)))
                .collect();
            t.levels[d + 1] = next;
        }
        t
    }

    /// Prefix closure of a set of full-depth codes.
    pub fn from_paths<I>(k: usize, depth: usize, paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitString>,
    {
        let mut t = Self::empty(k, depth);
        for p in paths {
            if p.len() != k * depth {
                return Err(Error::Length(format!(
                    "path of length {} in a tree with k={k}, depth={depth}",
                    p.len()
                )));
            }
            if !is_partition_code(&p, k)? {
                return Err(Error::Mismatch(format!("{p} is not a {k}-partition code")));
            }
            for d in (0..=depth).rev() {
                if !t.levels[d].insert(p.prefix(k * d)) {
                    break;
                }
            }
        }
        Ok(t)
    }

    /// Tree from an explicit node set, which must be prefix-closed. Dead
    /// branches are kept.
    pub fn from_nodes<I>(k: usize, depth: usize, nodes: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitString>,
    {
        let mut t = Self::empty(k, depth);
        for node in nodes {
            if node.len() % k != 0 || node.len() > k * depth {
                return Err(Error::Length(format!(
                    "node {node} does not fit k={k}, depth={depth}"
                )));
            }
            if !is_partition_code(&node, k)? {
                return Err(Error::Mismatch(format!("{node} is not a {k}-partition code")));
            }
            t.levels[node.len() / k].insert(node);
        }
        for d in 1..=depth {
            for node in &t.levels[d] {
                if !t.levels[d - 1].contains(&node.prefix(k * (d - 1))) {
                    return Err(Error::Inconsistent(format!("node {node} has no parent")));
                }
            }
        }
        Ok(t)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    pub fn contains(&self, node: &BitString) -> bool {
        node.len().is_multiple_of(self.k)
            && node.len() / self.k <= self.depth
            && self.levels[node.len() / self.k].contains(node)
    }

    pub fn level(&self, d: usize) -> &BTreeSet<BitString> {
        &self.levels[d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &BitString> {
        self.levels.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(BTreeSet::len).sum()
    }

    pub fn nonempty_at_depth(&self, d: usize) -> bool {
        d <= self.depth && !self.levels[d].is_empty()
    }

    pub fn paths_at_depth(&self, d: usize) -> PathSet {
        PathSet {
            k: self.k,
            codes: self.levels.get(d).cloned().unwrap_or_default(),
        }
    }

    /// Full-depth nodes.
    pub fn paths(&self) -> impl Iterator<Item = &BitString> {
        self.levels[self.depth].iter()
    }

    pub fn path_count(&self) -> usize {
        self.levels[self.depth].len()
    }

    /// Nodes of `T_ρ` at level `d`: those comparable with `rho`.
    pub fn descendants_at(&self, rho: &BitString, d: usize) -> impl Iterator<Item = &BitString> {
        let rho = rho.clone();
        self.levels[d].iter().filter(move |n| rho.is_prefix_of(n) || n.is_prefix_of(&rho))
    }

    /// Drops every node with no descendant at full depth.
    pub fn pruned(&self) -> PartitionTree {
        PartitionTree::from_paths(self.k, self.depth, self.paths().cloned())
            .expect("paths of a valid tree are valid")
    }

    /// Subtree of paths `X` with `τ ≺ X_i/σ` ([`RefineMode::Prefix`]) or
    /// `τ ⊆ X_i/σ` ([`RefineMode::Subset`]), where `X_i` is expanded to the
    /// universe through `layout`.
    pub fn refine_below(
        &self,
        part: usize,
        tau: &BitString,
        stem: &BitString,
        mode: RefineMode,
        layout: &Layout,
    ) -> Result<PartitionTree> {
        if part >= self.k {
            return Err(Error::PartOutOfRange {
                part,
                parts: self.k,
            });
        }
        if stem.len() > layout.universe() {
            return Err(Error::Length("stem longer than the universe".into()));
        }
        let kept = self.paths().filter(|x| {
            let reservoir = layout
                .expand(x, self.k, part)
                .overwrite(stem)
                .expect("stem fits the universe");
            match mode {
                RefineMode::Prefix => tau.is_prefix_of(&reservoir),
                RefineMode::Subset => tau.subset_leq(&reservoir),
            }
        });
        PartitionTree::from_paths(self.k, self.depth, kept.cloned())
    }

    /// Canonical text form: header `k=<k> depth=<d>`, then one node per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={} depth={}\n", self.k, self.depth);
        for node in self.nodes() {
            let _ = writeln!(out, "{node}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PartitionTree> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let mut k = None;
        let mut depth = None;
        for field in header.split_whitespace() {
            let parse = |v: &str| {
                v.parse::<usize>().map_err(|e| Error::Parse {
                    line: 1,
                    msg: e.to_string(),
                })
            };
            match field.split_once('=') {
                Some(("k", v)) => k = Some(parse(v)?),
                Some(("depth", v)) => depth = Some(parse(v)?),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("unexpected header field {field:?}"),
                    })
                }
            }
        }
        let (Some(k), Some(depth)) = (k, depth) else {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be `k=<k> depth=<d>`".into(),
            });
        };
        if k == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "k must be positive".into(),
            });
        }
        let nodes = lines
            .enumerate()
            .map(|(i, l)| {
                l.trim().parse::<BitString>().map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PartitionTree::from_nodes(k, depth, nodes)
    }
}

/// Cross of `n ≥ 2` trees sharing `k` and depth. The result's full-depth
/// paths are the crosses of all tuples of input paths.
pub fn cross_trees(trees: &[PartitionTree]) -> Result<PartitionTree> {
    cross_trees_bounded(trees, usize::MAX)
}

/// [`cross_trees`] that refuses to enumerate more than `max_tuples` path
/// tuples.
pub fn cross_trees_bounded(trees: &[PartitionTree], max_tuples: usize) -> Result<PartitionTree> {
    let n = trees.len();
    if n < 2 {
        return Err(Error::Mismatch(format!("cross needs at least 2 trees, got {n}")));
    }
    let (k, depth) = (trees[0].k, trees[0].depth);
    if trees.iter().any(|t| t.k != k || t.depth != depth) {
        return Err(Error::Mismatch("crossed trees must share k and depth".into()));
    }
    let out_k = k * n * (n - 1) / 2;
    let path_lists: Vec<Vec<&BitString>> = trees.iter().map(|t| t.paths().collect()).collect();
    if path_lists.iter().any(Vec::is_empty) {
        return Ok(PartitionTree::empty(out_k, depth));
    }
    let tuples = path_lists
        .iter()
        .try_fold(1usize, |acc, l| acc.checked_mul(l.len()))
        .unwrap_or(usize::MAX);
    if tuples > max_tuples {
        return Err(Error::Budget(format!(
            "cross of {n} trees needs {tuples} path tuples (limit {max_tuples})"
        )));
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    let mut buf: Vec<BitString> = Vec::with_capacity(n);
    loop {
        buf.clear();
        buf.extend(idx.iter().zip(&path_lists).map(|(&i, l)| l[i].clone()));
        out.insert(cross_codes(&buf, k)?);
        // odometer
        let mut pos = n;
        loop {
            if pos == 0 {
                return PartitionTree::from_paths(out_k, depth, out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < path_lists[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// All nonzero `k`-bit patterns, as strings of length `k`.
pub(crate) fn covering_patterns(k: usize) -> Vec<BitString> {
    (1u64..(1 << k))
        .map(|v| BitString::from_bools((0..k).map(|j| v >> (k - 1 - j) & 1 == 1)))
        .collect()
}

pub(crate) fn concat(a: &BitString, b: &BitString) -> BitString {
    BitString::from_bools(a.iter().chain(b.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn partition_code_examples() {
        assert!(is_partition_code(&bs("1001"), 2).unwrap());
        assert!(!is_partition_code(&bs("1000"), 2).unwrap());
        assert!(is_partition_code(&bs("1111"), 2).unwrap());
        assert!(is_partition_code(&bs("101"), 2).is_err());
    }

    #[test]
    fn cross_of_three_two_partitions() {
        // X0 = ({0},{1}), X1 = ({0,1},∅), X2 = ({0},{1})
        let x0 = crate::bitvec::interleave(&[bs("10"), bs("01")]).unwrap();
        let x1 = crate::bitvec::interleave(&[bs("11"), bs("00")]).unwrap();
        let x2 = x0.clone();
        let y = cross_codes(&[x0, x1, x2], 2).unwrap();
        let parts = crate::bitvec::deinterleave(&y, 6).unwrap();
        let expect = ["10", "10", "10", "00", "01", "00"].map(bs);
        assert_eq!(parts, expect);
        assert!(is_partition_code(&y, 6).unwrap());
    }

    #[test]
    fn cross_of_identical_copies_repeats_parts() {
        let x = crate::bitvec::interleave(&[bs("1101"), bs("0110"), bs("1001")]).unwrap();
        let y = cross_codes(&[x.clone(), x.clone(), x.clone(), x.clone()], 3).unwrap();
        let parts = crate::bitvec::deinterleave(&y, 18).unwrap();
        let orig = crate::bitvec::deinterleave(&x, 3).unwrap();
        for j in 0..3 {
            for (p, q) in pairs(4) {
                assert_eq!(parts[cross_part_index(j, p, q, 4)], orig[j]);
            }
        }
    }

    #[test]
    fn first_part_is_intersection_of_first_two() {
        let x0 = crate::bitvec::interleave(&[bs("1100"), bs("0111")]).unwrap();
        let x1 = crate::bitvec::interleave(&[bs("1010"), bs("0101")]).unwrap();
        let x2 = crate::bitvec::interleave(&[bs("0110"), bs("1001")]).unwrap();
        let y = cross_codes(&[x0, x1, x2], 2).unwrap();
        let parts = crate::bitvec::deinterleave(&y, 6).unwrap();
        assert_eq!(parts.len(), 6);
        assert_eq!(parts[0], bs("1000"));
    }

    #[test]
    fn cross_rejects_mismatches() {
        assert!(cross_codes(&[bs("10")], 2).is_err());
        assert!(cross_codes(&[bs("10"), bs("1001")], 2).is_err());
    }

    #[test]
    fn full_tree_level_one() {
        let t = PartitionTree::full(2, 3);
        let level: Vec<String> = t.paths_at_depth(1).codes.iter().map(|c| c.to_string()).collect();
        assert_eq!(level, ["01", "10", "11"]);
        assert_eq!(t.path_count(), 27);
        assert!((0..=3).all(|d| t.nonempty_at_depth(d)));
    }

    #[test]
    fn root_only_tree_is_empty_below() {
        let t = PartitionTree::from_nodes(2, 2, [BitString::new()]).unwrap();
        assert!(t.nonempty_at_depth(0));
        assert!(!t.nonempty_at_depth(1));
        assert!(t.pruned().is_empty());
        assert!(PartitionTree::empty(2, 2).paths_at_depth(2).is_empty());
    }

    #[test]
    fn self_cross_at_depth_zero_is_root() {
        let t = PartitionTree::full(2, 0);
        let c = cross_trees(&[t.clone(), t]).unwrap();
        assert_eq!(c.nodes().count(), 1);
        assert!(c.contains(&BitString::new()));
        assert_eq!(c.k(), 2);
    }

    #[test]
    fn from_nodes_rejects_orphans() {
        assert!(PartitionTree::from_nodes(1, 2, [bs(""), bs("11")]).is_err());
        assert!(PartitionTree::from_nodes(2, 1, [bs(""), bs("00")]).is_err());
    }

    #[test]
    fn refine_with_empty_tau_is_identity() {
        let t = PartitionTree::full(2, 3);
        let l = Layout::plain(3);
        for mode in [RefineMode::Prefix, RefineMode::Subset] {
            assert_eq!(t.refine_below(1, &bs(""), &bs(""), mode, &l).unwrap(), t);
        }
        assert!(t.refine_below(2, &bs(""), &bs(""), RefineMode::Prefix, &l).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let t = PartitionTree::full(2, 2);
        let back = PartitionTree::from_text(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert!(PartitionTree::from_text("k=2\n").is_err());
    }

    #[test]
    fn layout_groups_tail_by_membership() {
        let a = bs("1011001");
        let l = Layout::new(&a, 3);
        assert_eq!(l.cells(), 5);
        assert_eq!((0..7).map(|x| l.cell(x)).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 4, 3]);
        let all_a = Layout::new(&bs("1111"), 2);
        assert_eq!(all_a.cells(), 3);
        assert_eq!(Layout::new(&bs("10"), 5).cells(), 2);
        let code = bs("10101"); // k=1 cells 0..5
        assert_eq!(l.expand(&code, 1, 0), bs("1010110"));
    }
}
