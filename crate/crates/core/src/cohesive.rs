//! Finite-extension construction of a set cohesive for a sequence of sets,
//! and the limit partition of a stable coloring.

use serde::{Deserialize, Serialize};

use crate::bitvec::{BitString, GroundSets};
use crate::error::{Error, Result};
use crate::oracle::{Computation, Registry, Side};

/// A diagonal hit secured at one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesiveHit {
    pub stage: usize,
    pub functional: usize,
    pub n: usize,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesiveRun {
    pub g: BitString,
    /// `Z_s` for each stage.
    pub zs: Vec<BitString>,
    /// `ρ_s` for each stage.
    pub stems: Vec<BitString>,
    pub hits: Vec<CohesiveHit>,
}

impl CohesiveRun {
    /// `G \ Z_s ⊆ ρ_{s-1}` for every stage.
    pub fn almost_inside(&self) -> bool {
        self.zs.iter().enumerate().all(|(s, z)| {
            let before = if s == 0 { BitString::new() } else { self.stems[s - 1].clone() };
            self.g
                .ones_positions()
                .all(|x| z.get(x) || before.get(x))
        })
    }

    /// Functional used at stage `s`, if the registry had one.
    pub fn hit_at(&self, s: usize) -> Option<&CohesiveHit> {
        self.hits.iter().find(|h| h.stage == s)
    }
}

fn count_from(z: &BitString, from: usize) -> usize {
    z.ones_positions().filter(|&x| x >= from).count()
}

/// Looks for an entry of `e` that halts with the diagonal value on some
/// tested input and can be realized by extending `rho` inside `z`.
fn find_hit(
    reg: &Registry,
    e: usize,
    rho: &BitString,
    z: &BitString,
    c: &BitString,
    domain: std::ops::RangeInclusive<usize>,
) -> Result<Option<(usize, bool, BitString)>> {
    let n_univ = z.len();
    let table = reg.functional(e)?;
    for n in domain {
        let Some(d) = reg.diag_value(n) else { continue };
        'entries: for entry in table.entries.iter().filter(|en| en.input == n) {
            if entry.output != d || entry.settle > reg.s_max {
                continue;
            }
            let mut tau = rho.clone();
            let mut end = rho.len();
            for k in &entry.constraints {
                match k.side {
                    Side::C => {
                        if c.get(k.pos) != k.bit {
                            continue 'entries;
                        }
                    }
                    Side::G if k.pos < rho.len() => {
                        if rho.get(k.pos) != k.bit {
                            continue 'entries;
                        }
                    }
                    Side::G => {
                        if k.bit && !z.get(k.pos) {
                            continue 'entries;
                        }
                        if k.pos < n_univ {
                            end = end.max(k.pos + 1);
                        }
                    }
                }
            }
            tau = tau.padded(end);
            for k in &entry.constraints {
                if k.side == Side::G && k.bit && k.pos >= rho.len() {
                    tau.set(k.pos, true);
                }
            }
            return Ok(Some((n, d, tau)));
        }
    }
    Ok(None)
}

/// At stage `s` keeps `Z_s = Z_{s-1} ∩ C_s` if it has enough elements beyond
/// `ρ_{s-1}`, else `Z_{s-1} ∖ C_s`, then extends `ρ_{s-1}` inside `Z_s`,
/// securing a diagonal hit for the `s`-th registry functional when one is
/// realizable. "Enough" means at least the number of stages left.
///
/// Functionals are read with `ρ_s` as the set side and `C` as the second
/// oracle, on inputs `0..=domain_bound`.
pub fn cohesive_construction(
    sets: &[BitString],
    grounds: &GroundSets,
    reg: &Registry,
    domain_bound: usize,
) -> Result<CohesiveRun> {
    let n_univ = grounds.universe();
    if let Some(bad) = sets.iter().position(|s| s.len() != n_univ) {
        return Err(Error::Length(format!("set {bad} does not span the universe")));
    }
    let indices: Vec<usize> = reg.functionals.keys().copied().collect();
    let mut z = BitString::ones(n_univ);
    let mut rho = BitString::new();
    let mut run = CohesiveRun {
        g: BitString::new(),
        zs: Vec::new(),
        stems: Vec::new(),
        hits: Vec::new(),
    };
    let total = sets.len();
    for (s, cs) in sets.iter().enumerate() {
        let needed = total - s;
        let inside = z.and(cs);
        let outside = z.and(&cs.complement());
        let (avail_in, avail_out) = (count_from(&inside, rho.len()), count_from(&outside, rho.len()));
        z = if avail_in >= needed {
            inside
        } else if avail_out >= needed {
            outside
        } else {
            return Err(Error::ThresholdUnreachable {
                stage: s,
                available: avail_in.max(avail_out),
                needed,
            });
        };
        let mut next = rho.clone();
        if let Some(&e) = indices.get(s) {
            if let Some((n, value, tau)) = find_hit(reg, e, &rho, &z, &grounds.c, 0..=domain_bound)? {
                run.hits.push(CohesiveHit {
                    stage: s,
                    functional: e,
                    n,
                    value,
                });
                next = tau;
            }
        }
        // At least one new element, taken from `Z_s`.
        if next.count_ones() == rho.count_ones() {
            let from = next.len();
            let x = z.ones_positions().find(|&x| x >= from).ok_or(Error::ThresholdUnreachable {
                stage: s,
                available: 0,
                needed: 1,
            })?;
            next = next.padded(x + 1);
            next.set(x, true);
        }
        rho = next;
        run.zs.push(z.clone());
        run.stems.push(rho.clone());
    }
    run.g = rho.padded(n_univ);
    for h in &run.hits {
        let got = reg.eval_final(h.functional, &run.g, &grounds.c, h.n)?;
        if got != Computation::Halt(h.value) {
            return Err(Error::Verification {
                stage: h.stage,
                what: format!("recorded hit of functional {} on {} is lost", h.functional, h.n),
            });
        }
    }
    Ok(run)
}

/// Colors `f(m, n) ∈ {1, 2}` for `n < m < size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableColoringTable {
    size: usize,
    /// Row `m` holds colors of `(m, 0) … (m, m-1)`.
    rows: Vec<Vec<u8>>,
}

impl StableColoringTable {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut rows = Vec::with_capacity(size);
        for m in 0..size {
            let row: Vec<u8> = (0..m).map(|n| f(m, n)).collect();
            if let Some(n) = row.iter().position(|&c| c != 1 && c != 2) {
                return Err(Error::Mismatch(format!("color of ({m}, {n}) is not 1 or 2")));
            }
            rows.push(row);
        }
        Ok(StableColoringTable { size, rows })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn color(&self, m: usize, n: usize) -> u8 {
        self.rows[m][n]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitPartition {
    pub f1: BitString,
    pub f2: BitString,
    /// Columns whose color is not constant on the window.
    pub unstable: Vec<usize>,
}

/// `f1(n) = 1` iff `f(m, n) = 1` for every `m` in `[max(n+1, size/2), size)`.
/// Columns that take both colors on that window are listed as unstable
/// (and land in `f2`).
pub fn limit_partition(f: &StableColoringTable, horizon: usize) -> Result<LimitPartition> {
    if horizon >= f.size {
        return Err(Error::Length(format!(
            "horizon {horizon} needs a table of size above {horizon}, got {}",
            f.size
        )));
    }
    let mut f1 = BitString::zeros(horizon);
    let mut unstable = Vec::new();
    for n in 0..horizon {
        let lo = (n + 1).max(f.size / 2);
        let colors: Vec<u8> = (lo..f.size).map(|m| f.color(m, n)).collect();
        if colors.iter().all(|&c| c == 1) {
            f1.set(n, true);
        } else if colors.contains(&1) {
            unstable.push(n);
        }
    }
    let f2 = f1.complement();
    Ok(LimitPartition { f1, f2, unstable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Constraint, Entry, FunctionalTable};

    fn evens(n: usize) -> BitString {
        BitString::from_bools((0..n).map(|x| x % 2 == 0))
    }

    #[test]
    fn single_set_of_evens() {
        let g = GroundSets::new(BitString::zeros(64), BitString::zeros(64)).unwrap();
        let reg = Registry::new(64, 1);
        let run = cohesive_construction(&[evens(64)], &g, &reg, 0).unwrap();
        assert!(run.g.subset_leq(&evens(64)));
        assert!(run.g.count_ones() >= 1);
    }

    #[test]
    fn thin_set_goes_to_complement() {
        let g = GroundSets::new(BitString::zeros(16), BitString::zeros(16)).unwrap();
        let reg = Registry::new(16, 1);
        let sets = [BitString::from_positions(16, [3]), BitString::zeros(16)];
        let run = cohesive_construction(&sets, &g, &reg, 0).unwrap();
        assert!(!run.g.get(3));
        assert!(run.almost_inside());
    }

    #[test]
    fn hit_is_secured() {
        let g = GroundSets::new(BitString::zeros(16), BitString::zeros(16)).unwrap();
        let mut reg = Registry::new(16, 2);
        reg.diagonal.insert(0, true, 1);
        reg.add(FunctionalTable::with_entries(
            0,
            vec![Entry::new(0, vec![Constraint::g(4, true), Constraint::g(5, false)], 1, true)],
        ));
        let run = cohesive_construction(&[BitString::ones(16)], &g, &reg, 0).unwrap();
        assert_eq!(run.hits.len(), 1);
        assert!(run.g.get(4) && !run.g.get(5));
    }

    #[test]
    fn constant_colorings() {
        let ones = StableColoringTable::from_fn(10, |_, _| 1).unwrap();
        let lp = limit_partition(&ones, 8).unwrap();
        assert_eq!(lp.f1, BitString::ones(8));
        let twos = StableColoringTable::from_fn(10, |_, _| 2).unwrap();
        let lp = limit_partition(&twos, 8).unwrap();
        assert_eq!(lp.f1, BitString::zeros(8));
        assert_eq!(lp.f2, BitString::ones(8));
        assert!(lp.unstable.is_empty());
        assert!(limit_partition(&twos, 10).is_err());
        assert!(StableColoringTable::from_fn(3, |_, _| 0).is_err());
    }
}
