//! Ready-made registries: the shapes used by the examples, the acceptance
//! suite and the command line.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bitvec::{BitString, GroundSets};
use crate::oracle::{Constraint, Entry, FunctionalTable, Registry};
use crate::scope::Pair;

/// Functionals `0..count` with no entries.
pub fn empty_registry(universe: usize, count: usize, s_max: usize) -> Registry {
    let mut reg = Registry::new(universe, s_max);
    for e in 0..count {
        reg.add(FunctionalTable::new(e));
    }
    reg
}

/// Diagonal settled on `0..values.len()` and functionals `0` and `1` that
/// output `1 - Φ_n(n)` on those inputs without reading their oracle. Every
/// valuation that is not strictly correct is refuted outright, so the
/// diagonal looks computable from the disagreement set.
pub fn pa_like_registry(universe: usize, values: &[bool]) -> Registry {
    let mut reg = Registry::new(universe, 4);
    for (n, &v) in values.iter().enumerate() {
        reg.diagonal.insert(n, v, 1);
    }
    for e in 0..2 {
        let entries = values.iter().enumerate().map(|(n, &v)| Entry::new(n, vec![], 1, !v)).collect();
        reg.add(FunctionalTable::with_entries(e, entries));
    }
    reg
}

/// A registry of `pairs` functional pairs `(2t, 2t+1)` over `grounds`, with
/// the diagonal settled on `0..diag.len()`. Both functionals of a pair are
/// total on those inputs, and avoid the diagonal unless `G` holds certain
/// `A`-positions at or beyond `skip`, at least `gap` apart:
///
/// - pair `t ≡ 0 (mod 3)`: one position turns input 0 into a hit;
/// - pair `t ≡ 1 (mod 3)`: two positions together turn input 0 into a hit;
/// - pair `t ≡ 2 (mod 3)`: input 0 is missing, so the pair is never total.
///
/// The `Ā` side reads the same positions and so never sees them. Returns the
/// registry and its pairs.
pub fn hitting_registry(
    grounds: &GroundSets,
    pairs: usize,
    diag: &[bool],
    skip: usize,
    gap: usize,
) -> (Registry, Vec<Pair>) {
    let mut reg = Registry::new(grounds.universe(), 4);
    for (n, &v) in diag.iter().enumerate() {
        reg.diagonal.insert(n, v, 1);
    }
    let mut a_positions = Vec::new();
    for x in (skip..grounds.universe()).filter(|&x| grounds.a.get(x)) {
        if a_positions.last().is_none_or(|&y| x >= y + gap.max(1)) {
            a_positions.push(x);
        }
    }
    let mut next = a_positions.into_iter();
    let mut out = Vec::new();
    for t in 0..pairs {
        let shape = t % 3;
        let keys: Vec<usize> = match shape {
            0 => next.by_ref().take(1).collect(),
            1 => next.by_ref().take(2).collect(),
            _ => vec![],
        };
        for e in [2 * t, 2 * t + 1] {
            let mut table = FunctionalTable::new(e);
            for (n, &d) in diag.iter().enumerate() {
                if n == 0 && shape == 2 {
                    continue;
                }
                if n == 0 && !keys.is_empty() {
                    let all: Vec<Constraint> = keys.iter().map(|&x| Constraint::g(x, true)).collect();
                    table.push(Entry::new(0, all, 1, d));
                    for (j, &x) in keys.iter().enumerate() {
                        // first missing key decides the miss
                        let mut cs: Vec<Constraint> = keys[..j].iter().map(|&y| Constraint::g(y, true)).collect();
                        cs.push(Constraint::g(x, false));
                        table.push(Entry::new(0, cs, 1, !d));
                    }
                } else {
                    table.push(Entry::new(n, vec![], 1, !d));
                }
            }
            reg.add(table);
        }
        out.push(Pair::new(2 * t, 2 * t + 1));
    }
    (reg, out)
}

/// Random conflict-free registry: for each functional and input, a pivot
/// position splits the entries into two groups, each group sharing one
/// output. Entries get up to `extra` further random constraints, some of
/// them on `C`. The diagonal is settled on a random subset of `0..inputs`.
pub fn random_registry<R: Rng + ?Sized>(
    rng: &mut R,
    universe: usize,
    functionals: usize,
    inputs: usize,
    extra: usize,
    s_max: usize,
) -> Registry {
    let mut reg = Registry::new(universe, s_max);
    for n in 0..inputs {
        if rng.gen_bool(0.6) {
            reg.diagonal.insert(n, rng.gen(), rng.gen_range(1..=s_max));
        }
    }
    let positions: Vec<usize> = (0..universe).collect();
    for e in 0..functionals {
        let mut table = FunctionalTable::new(e);
        for n in 0..inputs {
            if universe == 0 {
                break;
            }
            let pivot = rng.gen_range(0..universe);
            for side in [true, false] {
                let output = rng.gen();
                for _ in 0..rng.gen_range(0..=2) {
                    let mut cs = vec![Constraint::g(pivot, side)];
                    let count = rng.gen_range(0..=extra);
                    for &x in positions.choose_multiple(rng, count) {
                        if x == pivot {
                            continue;
                        }
                        if rng.gen_bool(0.2) {
                            cs.push(Constraint::c(x, rng.gen()));
                        } else {
                            cs.push(Constraint::g(x, rng.gen()));
                        }
                    }
                    table.push(Entry::new(n, cs, rng.gen_range(0..=s_max + 1), output));
                }
            }
        }
        reg.add(table);
    }
    reg
}

/// Random ground sets of length `n`.
pub fn random_grounds<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroundSets {
    GroundSets::new(BitString::random(n, rng), BitString::random(n, rng)).expect("equal lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_registries_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let reg = random_registry(&mut rng, 6, 3, 3, 2, 3);
            assert!(reg.validate().is_empty(), "{:?}", reg.validate());
        }
        let g = random_grounds(&mut rng, 64);
        let (reg, pairs) = hitting_registry(&g, 3, &[true, false, true, true], 4, 6);
        assert!(reg.validate().is_empty());
        assert_eq!(pairs.len(), 3);
        assert!(pa_like_registry(8, &[true, false]).validate().is_empty());
    }
}
