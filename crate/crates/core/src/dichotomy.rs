//! Forcing `R_{e,i}`: the search that decides between a correct valuation
//! the condition disagrees with (Case I) and `2k+1` incompatible valuations
//! it agrees with (Case II), and the extensions built from each.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitvec::{BitString, GroundSets};
use crate::error::{Error, Result};
use crate::forcing::{extends, forces_r_at_horizon, unforced_parts, Condition, ExtensionWitness};
use crate::ptree::{cross_trees_bounded, Layout, PartitionTree, RefineMode};
use crate::scope::{Pair, Scope};
use crate::valuation::{build_sp_tree, disagreement_needs, enumerate_e, Half, Need, Valuation};

/// Splits every part of path `x` along `A`: the `A`-cells of part `j` go to
/// half `2j`, the `Ā`-cells to half `2j + 1`.
pub fn a_split(x: &BitString, k: usize, layout: &Layout, grounds: &GroundSets) -> BitString {
    let cells = layout.cells();
    let cell_in_a: Vec<bool> = (0..cells)
        .map(|cell| {
            layout
                .positions_of_cell(cell)
                .next()
                .is_some_and(|p| grounds.a.get(p))
        })
        .collect();
    let mut z = BitString::zeros(2 * k * cells);
    for (cell, &in_a) in cell_in_a.iter().enumerate() {
        for j in 0..k {
            if crate::bitvec::code_bit(x, k, cell, j) {
                z.set(2 * k * cell + 2 * j + usize::from(!in_a), true);
            }
        }
    }
    z
}

/// A Case I extension and the computation it secures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseIStep {
    pub condition: Condition,
    pub part: usize,
    pub n: usize,
    pub half: Half,
    pub need: Need,
}

/// Extends `σ_j` so that one of the functionals halts on some `n ∈ dom p`
/// with the diagonal value, for every set satisfying the new condition on
/// part `j`. `p` must be strictly correct and `S_p` empty.
pub fn case_i_extension(
    c: &Condition,
    p: &Valuation,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
) -> Result<CaseIStep> {
    if !p.is_strictly_correct(scope.registry) {
        return Err(Error::CaseMismatch(format!("{p} is not strictly correct")));
    }
    let mut needs = disagreement_needs(c, p, pair, u, scope)?;
    needs.sort_by_key(|nd| (nd.part, nd.n, nd.half, nd.entry));
    let x = c
        .tree
        .paths()
        .next()
        .ok_or_else(|| Error::Inconsistent("empty class".into()))?;
    let z = a_split(x, c.k(), &scope.layout, scope.grounds);
    let need = needs
        .into_iter()
        .find(|nd| nd.fires(&z, c.k()))
        .ok_or_else(|| Error::CaseMismatch(format!("no computation refutes the split of {x} for {p}")))?;
    let j = need.part;
    let stem = &c.stems[j];
    let n_univ = scope.universe();
    let end = need
        .ones
        .iter()
        .chain(need.zeros.iter().filter(|&&x| x < n_univ))
        .map(|&x| x + 1)
        .max()
        .unwrap_or(0)
        .max(stem.len());
    let mut tau = stem.padded(end);
    for &x in &need.ones {
        tau.set(x, true);
    }
    let tree = c.tree.refine_below(j, &tau, stem, RefineMode::Subset, &scope.layout)?;
    let mut stems = c.stems.clone();
    stems[j] = tau;
    Ok(CaseIStep {
        condition: Condition::new(stems, tree),
        part: j,
        n: need.n,
        half: need.half,
        need,
    })
}

/// Crosses the classes `S_{p_0}, …, S_{p_{2k}}`. New part `t·C(2k+1,2) + r`
/// is half `t` intersected across the `r`-th pair of classes; it keeps the
/// stem of old part `t / 2`.
pub fn case_ii_extension(
    c: &Condition,
    ps: &[Valuation],
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
) -> Result<(Condition, ExtensionWitness)> {
    let k = c.k();
    if ps.len() != 2 * k + 1 {
        return Err(Error::CaseMismatch(format!(
            "{} valuations given, {} needed",
            ps.len(),
            2 * k + 1
        )));
    }
    for (a, p) in ps.iter().enumerate() {
        if let Some(q) = ps[a + 1..].iter().find(|q| !p.incompatible(q)) {
            return Err(Error::CaseMismatch(format!("{p} and {q} are compatible")));
        }
    }
    let depth = c.tree.depth();
    let mut classes: Vec<PartitionTree> = Vec::with_capacity(ps.len());
    for p in ps {
        let s = build_sp_tree(c, p, pair, u, scope, depth)?;
        if s.is_empty() {
            return Err(Error::CaseMismatch(format!("the condition disagrees with {p}")));
        }
        classes.push(s);
    }
    let q = cross_trees_bounded(&classes, scope.limits.max_tuples)?;
    let n = ps.len();
    let np = n * (n - 1) / 2;
    let new_k = 2 * k * np;
    let f = ExtensionWitness((0..new_k).map(|i| (i / np) / 2).collect());
    let stems = f.0.iter().map(|&j| c.stems[j].clone()).collect();
    Ok((Condition::new(stems, q), f))
}

/// What the dichotomy search found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchOutcome {
    CaseI {
        p: Valuation,
    },
    CaseII {
        valuations: Vec<Valuation>,
        witnesses: Vec<usize>,
    },
    Unresolved {
        reason: String,
    },
    /// The finite instance admits a diagonal-avoiding `h` built from the
    /// disagreement set: the diagonal behaves as if computable from `C`.
    HypothesisViolated {
        h: Valuation,
        witnesses: Vec<usize>,
        reason: String,
    },
}

/// For `F ⊆ 0..=bound`: `Ok(())` if `F ∈ S`, else the least witness.
fn s_membership(f: &BTreeSet<usize>, e: &[Valuation], scope: &Scope<'_>) -> std::result::Result<(), usize> {
    match scope.domain().find(|n| !f.contains(n) && s_choice(f, *n, e, scope).is_none()) {
        Some(n) => Err(n),
        None => Ok(()),
    }
}

/// Why `n` does not witness `F ∉ S`: the diagonal halts there, or a
/// disagreeing valuation covers `F ∪ {n}` and is strictly correct elsewhere.
enum Choice<'a> {
    Halts(bool),
    Valuation(&'a Valuation),
}

fn s_choice<'a>(f: &BTreeSet<usize>, n: usize, e: &'a [Valuation], scope: &Scope<'_>) -> Option<Choice<'a>> {
    let reg = scope.registry;
    if let Some(v) = reg.diag_value(n) {
        return Some(Choice::Halts(v));
    }
    e.iter()
        .find(|p| {
            p.get(n).is_some()
                && f.iter().all(|m| p.get(*m).is_some())
                && p.0
                    .iter()
                    .filter(|(m, _)| **m != n && !f.contains(m))
                    .all(|(m, v)| reg.diag_value(*m) == Some(!*v))
        })
        .map(Choice::Valuation)
}

fn build_h(f: &BTreeSet<usize>, e: &[Valuation], scope: &Scope<'_>) -> Valuation {
    let mut h = Valuation::new();
    for &n in f {
        h.0.insert(n, false);
    }
    for n in scope.domain().filter(|n| !f.contains(n)) {
        match s_choice(f, n, e, scope) {
            Some(Choice::Halts(v)) => {
                h.0.insert(n, !v);
            }
            Some(Choice::Valuation(p)) => {
                h.0.insert(n, !p.get(n).expect("chosen valuations cover n"));
            }
            None => {}
        }
    }
    h
}

/// Runs the dichotomy on the valuations with domain inside
/// `0..=domain_bound`, inspecting classes to `depth` cells.
pub fn dichotomy_search(
    c: &Condition,
    pair: Pair,
    u: &BTreeSet<usize>,
    scope: &Scope<'_>,
    depth: usize,
) -> Result<SearchOutcome> {
    let reg = scope.registry;
    let e = match enumerate_e(c, pair, u, scope, depth) {
        Ok(e) => e,
        Err(Error::Budget(msg)) => return Ok(SearchOutcome::Unresolved { reason: msg }),
        Err(err) => return Err(err),
    };
    if let Some(p) = e.discovered.iter().find(|p| p.is_strictly_correct(reg)) {
        return Ok(SearchOutcome::CaseI { p: p.clone() });
    }
    let e = &e.discovered;
    let mut f = BTreeSet::new();
    let mut witnesses = Vec::new();
    let needed = 2 * c.k() + 1;
    loop {
        match s_membership(&f, e, scope) {
            Ok(()) => {
                if scope.domain().all(|n| f.contains(&n)) {
                    return Ok(SearchOutcome::Unresolved {
                        reason: format!(
                            "inputs 0..={} exhausted after {} witnesses",
                            scope.domain_bound,
                            witnesses.len()
                        ),
                    });
                }
                return Ok(SearchOutcome::HypothesisViolated {
                    h: build_h(&f, e, scope),
                    reason: if f.is_empty() {
                        "the empty set belongs to S".into()
                    } else {
                        format!("the witnesses {witnesses:?} form a set in S")
                    },
                    witnesses,
                });
            }
            Err(n) => {
                f.insert(n);
                witnesses.push(n);
            }
        }
        if 1usize << witnesses.len() >= needed {
            if depth < c.tree.depth() {
                return Ok(SearchOutcome::Unresolved {
                    reason: format!("inspection depth {depth} is below the class depth {}", c.tree.depth()),
                });
            }
            let mut domain = witnesses.clone();
            domain.sort_unstable();
            let valuations = Valuation::all_on(&domain).into_iter().take(needed).collect();
            return Ok(SearchOutcome::CaseII { valuations, witnesses });
        }
    }
}

/// How one round of an `R` stage was handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepTag {
    Qm,
    CaseI,
    CaseII,
    /// `U(c)` was already empty: nothing to do.
    AlreadyForced,
    Unresolved,
    HypothesisViolated,
}

/// One round of an `R` stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RStep {
    pub round: usize,
    pub tag: StepTag,
    pub k_before: usize,
    pub k_after: usize,
    pub u_before: Vec<usize>,
    pub u_after: Vec<usize>,
    pub valuations: Vec<Valuation>,
    pub witness: ExtensionWitness,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RStatus {
    Forced,
    Unresolved { reason: String },
    HypothesisViolated { h: Valuation, witnesses: Vec<usize>, reason: String },
}

/// The condition reached by an `R` stage, with the composed witness back
/// to the starting condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RExtension {
    pub condition: Condition,
    pub witness: ExtensionWitness,
    pub steps: Vec<RStep>,
    pub status: RStatus,
}

/// Alternates search and extension until every part forces `R_{e,i}`, at
/// most `|U(c)|` rounds.
pub fn force_r_extension(c: &Condition, pair: Pair, scope: &Scope<'_>, depth: usize) -> Result<RExtension> {
    let mut cur = c.clone();
    let mut witness = ExtensionWitness::identity(c.k());
    let mut steps = Vec::new();
    let mut u = unforced_parts(&cur, pair, scope)?;
    let cap = u.len();
    let finish = |cur, witness, steps, status| {
        Ok(RExtension {
            condition: cur,
            witness,
            steps,
            status,
        })
    };
    if u.is_empty() {
        steps.push(RStep {
            round: 0,
            tag: StepTag::AlreadyForced,
            k_before: cur.k(),
            k_after: cur.k(),
            u_before: vec![],
            u_after: vec![],
            valuations: vec![],
            witness: witness.clone(),
            detail: String::new(),
        });
        return finish(cur, witness, steps, RStatus::Forced);
    }
    for round in 0..cap {
        let k_before = cur.k();
        let u_before: Vec<usize> = u.iter().copied().collect();
        let outcome = dichotomy_search(&cur, pair, &u, scope, depth)?;
        let mut step = RStep {
            round,
            tag: StepTag::Unresolved,
            k_before,
            k_after: k_before,
            u_before,
            u_after: vec![],
            valuations: vec![],
            witness: ExtensionWitness::identity(k_before),
            detail: String::new(),
        };
        let (next, f) = match outcome {
            SearchOutcome::CaseI { p } => {
                let s = case_i_extension(&cur, &p, pair, &u, scope)?;
                step.tag = StepTag::CaseI;
                step.valuations = vec![p];
                step.detail = format!("part {} secures input {} on the {:?} half", s.part, s.n, s.half);
                if !forces_r_at_horizon(&s.condition, s.part, pair, scope)? {
                    return Err(Error::Verification {
                        stage: round,
                        what: format!("Case I part {} does not force the requirement", s.part),
                    });
                }
                (s.condition, ExtensionWitness::identity(k_before))
            }
            SearchOutcome::CaseII { valuations, witnesses } => {
                step.tag = StepTag::CaseII;
                step.valuations = valuations.clone();
                step.detail = format!("witnesses {witnesses:?}");
                match case_ii_extension(&cur, &valuations, pair, &u, scope) {
                    Ok(r) => r,
                    Err(Error::Budget(msg)) => {
                        step.detail = msg.clone();
                        step.tag = StepTag::Unresolved;
                        step.u_after = step.u_before.clone();
                        steps.push(step);
                        return finish(cur, witness, steps, RStatus::Unresolved { reason: msg });
                    }
                    Err(err) => return Err(err),
                }
            }
            SearchOutcome::Unresolved { reason } => {
                step.detail = reason.clone();
                step.u_after = step.u_before.clone();
                steps.push(step);
                return finish(cur, witness, steps, RStatus::Unresolved { reason });
            }
            SearchOutcome::HypothesisViolated { h, witnesses, reason } => {
                step.tag = StepTag::HypothesisViolated;
                step.valuations = vec![h.clone()];
                step.detail = reason.clone();
                step.u_after = step.u_before.clone();
                steps.push(step);
                return finish(cur, witness, steps, RStatus::HypothesisViolated { h, witnesses, reason });
            }
        };
        if !extends(&next, &cur, &f, &scope.layout) {
            return Err(Error::Verification {
                stage: round,
                what: format!("{:?} output does not extend its input", step.tag),
            });
        }
        let next_u = unforced_parts(&next, pair, scope)?;
        if step.tag == StepTag::CaseI && next_u.len() >= u.len() {
            return Err(Error::Verification {
                stage: round,
                what: "Case I did not shrink the unforced parts".into(),
            });
        }
        step.k_after = next.k();
        step.u_after = next_u.iter().copied().collect();
        step.witness = f.clone();
        steps.push(step);
        witness = f.then(&witness);
        cur = next;
        u = next_u;
        if u.is_empty() {
            return finish(cur, witness, steps, RStatus::Forced);
        }
    }
    let reason = format!("round cap {cap} reached with {} unforced parts", u.len());
    finish(cur, witness, steps, RStatus::Unresolved { reason })
}
