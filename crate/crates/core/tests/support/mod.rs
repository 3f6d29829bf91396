//! Brute-force oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use tree_forcing::bitvec::code_bit;
use tree_forcing::forcing::r_witness;
use tree_forcing::oracle::Computation;
use tree_forcing::{BitString, Condition, Layout, Pair, PartitionTree, Registry, Scope, Valuation};

pub fn bs(s: &str) -> BitString {
    s.parse().unwrap()
}

/// Every subset of the 1-positions of `x`.
pub fn subsets(x: &BitString) -> Vec<BitString> {
    let ones: Vec<usize> = x.ones_positions().collect();
    (0u64..1 << ones.len())
        .map(|m| BitString::from_positions(x.len(), ones.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &p)| p)))
        .collect()
}

/// All strings of length `n`.
pub fn all_strings(n: usize) -> Vec<BitString> {
    subsets(&BitString::ones(n))
}

/// Some `Y ⊆ x` and `n ∈ dom p` with `Φ_e^{(Y/ρ ∩ mask) ⊕ C}(n)↓ ≠ p(n)`,
/// by enumerating every `Y`.
pub fn brute_functional_disagrees(
    reg: &Registry,
    e: usize,
    rho: &BitString,
    x: &BitString,
    p: &Valuation,
    mask: &BitString,
    c: &BitString,
) -> bool {
    subsets(x).iter().any(|y| brute_disagrees_on(reg, e, &y.overwrite(rho).unwrap().and(mask), p, c))
}

/// The oracle `g` itself produces a value contradicting `p`.
pub fn brute_disagrees_on(reg: &Registry, e: usize, g: &BitString, p: &Valuation, c: &BitString) -> bool {
    p.0.iter().any(|(&n, &v)| matches!(reg.eval_final(e, g, c, n).unwrap(), Computation::Halt(b) if b != v))
}

/// Every cover split of `x` (a `k`-part code): each cell of part `j` goes to
/// half `2j`, half `2j+1`, or both.
pub fn cover_splits(x: &BitString, k: usize) -> Vec<BitString> {
    let cells = x.len() / k;
    let mut out = vec![BitString::zeros(2 * k * cells)];
    for cell in 0..cells {
        for j in 0..k {
            if !code_bit(x, k, cell, j) {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * 3);
            for z in &out {
                for (lo, hi) in [(true, false), (false, true), (true, true)] {
                    let mut z = z.clone();
                    z.set(2 * k * cell + 2 * j, lo);
                    z.set(2 * k * cell + 2 * j + 1, hi);
                    next.push(z);
                }
            }
            out = next;
        }
    }
    out
}

/// Does split `z` survive every `μ`, `j ∈ u`, `n ∈ dom p`? Checked by
/// enumerating the subsets of each half beyond the stem.
pub fn brute_split_survives(c: &Condition, z: &BitString, p: &Valuation, pair: Pair, u: &BTreeSet<usize>, scope: &Scope<'_>) -> bool {
    let k = c.k();
    let a = &scope.grounds.a;
    let abar = scope.grounds.a_complement();
    for &j in u {
        let sigma = &c.stems[j];
        for (half, func, mask) in [(0, pair.e, a), (1, pair.i, &abar)] {
            let zexp = scope.layout.expand(z, 2 * k, 2 * j + half);
            let beyond = BitString::from_bools((0..zexp.len()).map(|x| x >= sigma.len() && zexp.get(x)));
            let stem_part = sigma.and(mask);
            for w in subsets(&beyond) {
                let oracle = w.overwrite(&stem_part).unwrap();
                if brute_disagrees_on(scope.registry, func, &oracle, p, &scope.grounds.c) {
                    return false;
                }
            }
        }
    }
    true
}

/// Surviving cover splits of every full-depth path: the class `S_p`.
pub fn brute_sp_paths(c: &Condition, p: &Valuation, pair: Pair, u: &BTreeSet<usize>, scope: &Scope<'_>) -> BTreeSet<BitString> {
    let mut out = BTreeSet::new();
    for x in c.tree.paths() {
        for z in cover_splits(x, c.k()) {
            if brute_split_survives(c, &z, p, pair, u, scope) {
                out.insert(z);
            }
        }
    }
    out
}

/// Direct reading of disagreement: every path and every cover split is
/// refuted.
pub fn brute_condition_disagrees(c: &Condition, p: &Valuation, pair: Pair, u: &BTreeSet<usize>, scope: &Scope<'_>) -> bool {
    c.tree
        .paths()
        .all(|x| cover_splits(x, c.k()).iter().all(|z| !brute_split_survives(c, z, p, pair, u, scope)))
}

/// Every set of the universe satisfying `c` on `part`: it starts with the
/// stem and lies inside some overwritten reservoir.
pub fn satisfying_sets(c: &Condition, part: usize, layout: &Layout) -> Vec<BitString> {
    let stem = &c.stems[part];
    let reservoirs: BTreeSet<BitString> = c
        .tree
        .paths()
        .map(|x| layout.expand(x, c.k(), part).overwrite(stem).unwrap())
        .collect();
    all_strings(layout.universe())
        .into_iter()
        .filter(|g| stem.is_prefix_of(g) && reservoirs.iter().any(|r| g.subset_leq(r)))
        .collect()
}

/// `R_{e,i}` holds for every set satisfying `c` on `part`.
pub fn brute_forces_r(c: &Condition, part: usize, pair: Pair, scope: &Scope<'_>) -> bool {
    satisfying_sets(c, part, &scope.layout)
        .iter()
        .all(|g| r_witness(g, pair, scope).unwrap().is_some())
}

pub fn brute_unforced(c: &Condition, pair: Pair, scope: &Scope<'_>) -> BTreeSet<usize> {
    (0..c.k()).filter(|&j| !brute_forces_r(c, j, pair, scope)).collect()
}

/// A random covering code of `cells` cells and `k` parts.
pub fn random_code<R: Rng + ?Sized>(rng: &mut R, k: usize, cells: usize) -> BitString {
    let mut code = BitString::zeros(k * cells);
    for cell in 0..cells {
        loop {
            let mut any = false;
            for j in 0..k {
                if rng.gen_bool(0.5) {
                    code.set(k * cell + j, true);
                    any = true;
                }
            }
            if any {
                break;
            }
        }
    }
    code
}

/// A tree with `1..=max_paths` random full-depth paths.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, k: usize, cells: usize, max_paths: usize) -> PartitionTree {
    let count = rng.gen_range(1..=max_paths.max(1));
    let paths: Vec<BitString> = (0..count).map(|_| random_code(rng, k, cells)).collect();
    PartitionTree::from_paths(k, cells, paths).unwrap()
}

/// A random condition: random tree, stems drawn from the reservoirs.
pub fn random_condition<R: Rng + ?Sized>(rng: &mut R, k: usize, layout: &Layout, max_paths: usize, max_stem: usize) -> Condition {
    let tree = random_tree(rng, k, layout.cells(), max_paths);
    let x = tree.paths().next().unwrap().clone();
    let n = layout.universe();
    let stems = (0..k)
        .map(|j| {
            let len = rng.gen_range(0..=max_stem.min(n));
            let r = layout.expand(&x, k, j);
            BitString::from_bools((0..len).map(|p| r.get(p) && rng.gen_bool(0.6)))
        })
        .collect();
    Condition::new(stems, tree)
}

/// Every valuation with `|dom p| ≤ max_dom` and domain inside `0..inputs`.
pub fn small_valuations(inputs: usize, max_dom: usize) -> Vec<Valuation> {
    Valuation::canonical_up_to(inputs - 1)
        .into_iter()
        .filter(|p| p.len() <= max_dom)
        .collect()
}
