//! The construction `c_0 ≥ c_1 ≥ …`, extraction of the generic set along a
//! chain of acceptable parts, and requirement checking.

use serde::{Deserialize, Serialize};

use crate::accept::{acceptable_parts, force_qm_extension};
use crate::bitvec::{BitString, GroundSets};
use crate::dichotomy::{force_r_extension, RStatus, RStep, StepTag};
use crate::error::{Error, Result};
use crate::forcing::{
    extends, forces_qm, r_witness, satisfies_on_part, unforced_parts, Condition, ExtensionWitness, RWitness,
};
use crate::oracle::Registry;
use crate::scope::{Limits, Pair, Scope};
use crate::valuation::Valuation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Requirement {
    /// `|G ∩ A| ≥ m` and `|G ∩ Ā| ≥ m`.
    Q { m: usize },
    /// `Φ_e^{(G∩A)⊕C}` or `Φ_i^{(G∩Ā)⊕C}` is not a 2-valued diagonal-avoiding
    /// function on the tested inputs.
    R { e: usize, i: usize },
}

impl std::fmt::Display for Requirement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Requirement::Q { m } => write!(f, "Q_{m}"),
            Requirement::R { e, i } => write!(f, "R_{{{e},{i}}}"),
        }
    }
}

/// Inverse of the Cantor pairing `⟨a, b⟩ = (a+b)(a+b+1)/2 + b`.
pub fn cantor_unpair(s: usize) -> (usize, usize) {
    let mut w = 0;
    while (w + 1) * (w + 2) / 2 <= s {
        w += 1;
    }
    let b = s - w * (w + 1) / 2;
    (w - b, b)
}

/// Requirements and the budgets used to meet them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub requirements: Vec<Requirement>,
    /// Leading positions given their own tree cell.
    pub depth: usize,
    /// Requirements and valuations range over inputs `0..=domain_bound`.
    pub domain_bound: usize,
    /// Acceptability threshold; defaults to the largest scheduled `m`
    /// (at least 1).
    pub threshold: Option<usize>,
    /// Cells inspected when enumerating disagreements; defaults to all.
    pub inspection_depth: Option<usize>,
    pub limits: Limits,
}

impl Schedule {
    /// `Q_0, R_{p_0}, Q_1, R_{p_1}, …` ending with `Q_{max_m}` once the
    /// pairs run out.
    pub fn alternating(pairs: &[Pair], max_m: usize, depth: usize, domain_bound: usize) -> Self {
        let mut requirements = Vec::new();
        for t in 0..=max_m.max(pairs.len().saturating_sub(1)) {
            if t <= max_m {
                requirements.push(Requirement::Q { m: t });
            }
            if let Some(p) = pairs.get(t) {
                requirements.push(Requirement::R { e: p.e, i: p.i });
            }
        }
        Schedule {
            requirements,
            depth,
            domain_bound,
            threshold: None,
            inspection_depth: None,
            limits: Limits::default(),
        }
    }

    /// `stages` requirements: `Q_t` at stage `2t`, and at stage `2t+1` the
    /// requirement for the `t`-th pair in Cantor order over the registry's
    /// functional indices.
    pub fn standard(stages: usize, registry: &Registry, depth: usize, domain_bound: usize) -> Self {
        let idx: Vec<usize> = registry.functionals.keys().copied().collect();
        let mut pairs = Vec::new();
        let mut s = 0;
        while !idx.is_empty() && pairs.len() < stages / 2 {
            let (a, b) = cantor_unpair(s);
            s += 1;
            if a < idx.len() && b < idx.len() {
                pairs.push(Pair::new(idx[a], idx[b]));
            }
        }
        let mut requirements = Vec::with_capacity(stages);
        for st in 0..stages {
            match (st % 2, pairs.get(st / 2)) {
                (1, Some(p)) => requirements.push(Requirement::R { e: p.e, i: p.i }),
                _ => requirements.push(Requirement::Q { m: st / 2 }),
            }
        }
        Schedule {
            requirements,
            depth,
            domain_bound,
            threshold: None,
            inspection_depth: None,
            limits: Limits::default(),
        }
    }

    pub fn max_m(&self) -> usize {
        self.requirements
            .iter()
            .filter_map(|r| match r {
                Requirement::Q { m } => Some(*m),
                Requirement::R { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn acceptability_threshold(&self) -> usize {
        self.threshold.unwrap_or_else(|| self.max_m()).max(1)
    }

    pub fn scope<'a>(&self, registry: &'a Registry, grounds: &'a GroundSets) -> Scope<'a> {
        Scope::new(registry, grounds, self.depth, self.domain_bound).with_limits(self.limits)
    }
}

/// One stage of the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub requirement: Requirement,
    pub tag: StepTag,
    pub k_before: usize,
    pub k_after: usize,
    /// Witness from this stage's parts to the previous stage's parts.
    pub witness: ExtensionWitness,
    /// Parts extended by a `Q` stage.
    pub forced_parts: Vec<usize>,
    pub rounds: Vec<RStep>,
    pub acceptable: Vec<usize>,
    pub condition: Condition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Complete,
    Unresolved {
        stage: usize,
        reason: String,
    },
    HypothesisViolated {
        stage: usize,
        h: Valuation,
        witnesses: Vec<usize>,
        reason: String,
    },
}

impl Outcome {
    /// Process exit code: 0 complete, 2 unresolved, 3 hypothesis violated.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Complete => 0,
            Outcome::Unresolved { .. } => 2,
            Outcome::HypothesisViolated { .. } => 3,
        }
    }
}

/// Inputs of a run, enough to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub a: BitString,
    pub c: BitString,
    pub registry: String,
    pub schedule: Schedule,
}

/// The generic set read off a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    /// Part `i_s` of each condition, starting with `c_0`.
    pub chain: Vec<usize>,
    pub g: BitString,
}

/// Result of checking one requirement on `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementCheck {
    pub requirement: Requirement,
    pub satisfied: bool,
    /// For `Q_m`: `|G ∩ A|` and `|G ∩ Ā|`.
    pub counts: Option<(usize, usize)>,
    /// For `R_{e,i}`: the disjunct that holds and its input.
    pub witness: Option<RWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<RequirementCheck>,
}

impl Report {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RequirementCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub stages: Vec<StageRecord>,
    pub outcome: Outcome,
    pub extraction: Option<Extraction>,
    pub report: Option<Report>,
}

impl Trace {
    /// Condition after the last recorded stage.
    pub fn final_condition(&self, scope: &Scope<'_>) -> Condition {
        self.stages
            .last()
            .map_or_else(|| Condition::initial(&scope.layout), |r| r.condition.clone())
    }
}

fn verify_stage(
    stage: usize,
    next: &Condition,
    prev: &Condition,
    f: &ExtensionWitness,
    scope: &Scope<'_>,
    t: usize,
) -> Result<Vec<usize>> {
    next.validate(&scope.layout).map_err(|e| Error::Verification {
        stage,
        what: e.to_string(),
    })?;
    if !extends(next, prev, f, &scope.layout) {
        return Err(Error::Verification {
            stage,
            what: "condition does not extend its predecessor".into(),
        });
    }
    let acc: Vec<usize> = acceptable_parts(next, scope.grounds, &scope.layout, t).into_iter().collect();
    if acc.is_empty() {
        return Err(Error::Verification {
            stage,
            what: format!("no part is acceptable at threshold {t}"),
        });
    }
    Ok(acc)
}

/// Forces `Q_m` on every part acceptable at `max(t, m)`, in index order.
fn q_stage(c: &Condition, m: usize, scope: &Scope<'_>, t: usize) -> Result<(Condition, Vec<usize>)> {
    let mut cur = c.clone();
    let mut forced = Vec::new();
    for i in 0..c.k() {
        if forces_qm(&cur, i, scope.grounds, m)? {
            continue;
        }
        if acceptable_parts(&cur, scope.grounds, &scope.layout, t.max(m)).contains(&i) {
            cur = force_qm_extension(&cur, i, scope.grounds, &scope.layout, m)?;
            forced.push(i);
        }
    }
    Ok((cur, forced))
}

/// Runs the schedule from `c_0 = (1, ε, {ω})`, verifying after each stage
/// that the new condition extends the old one and has an acceptable part.
pub fn run_construction(grounds: &GroundSets, registry: &Registry, schedule: &Schedule) -> Result<Trace> {
    let scope = schedule.scope(registry, grounds);
    let t = schedule.acceptability_threshold();
    let depth = schedule.inspection_depth.unwrap_or(scope.cells());
    let header = TraceHeader {
        a: grounds.a.clone(),
        c: grounds.c.clone(),
        registry: registry.to_text(),
        schedule: schedule.clone(),
    };
    let mut cur = Condition::initial(&scope.layout);
    let mut stages = Vec::new();
    let mut outcome = Outcome::Complete;
    for (s, req) in schedule.requirements.iter().enumerate() {
        let k_before = cur.k();
        let (next, witness, tag, forced, rounds, halt) = match *req {
            Requirement::Q { m } => {
                let (next, forced) = q_stage(&cur, m, &scope, t)?;
                (next, ExtensionWitness::identity(k_before), StepTag::Qm, forced, vec![], None)
            }
            Requirement::R { e, i } => {
                let r = force_r_extension(&cur, Pair::new(e, i), &scope, depth)?;
                let tag = r.steps.last().map_or(StepTag::AlreadyForced, |st| st.tag);
                let halt = match r.status {
                    RStatus::Forced => None,
                    RStatus::Unresolved { reason } => Some(Outcome::Unresolved { stage: s, reason }),
                    RStatus::HypothesisViolated { h, witnesses, reason } => Some(Outcome::HypothesisViolated {
                        stage: s,
                        h,
                        witnesses,
                        reason,
                    }),
                };
                (r.condition, r.witness, tag, vec![], r.steps, halt)
            }
        };
        let acceptable = verify_stage(s, &next, &cur, &witness, &scope, t)?;
        stages.push(StageRecord {
            stage: s,
            requirement: *req,
            tag,
            k_before,
            k_after: next.k(),
            witness,
            forced_parts: forced,
            rounds,
            acceptable,
            condition: next.clone(),
        });
        cur = next;
        if let Some(h) = halt {
            outcome = h;
            break;
        }
    }
    let mut trace = Trace {
        header,
        stages,
        outcome,
        extraction: None,
        report: None,
    };
    if trace.outcome == Outcome::Complete {
        let ex = select_path_and_extract_g(&trace, &scope)?;
        trace.report = Some(verify_requirements(&ex.g, &scope, schedule)?);
        trace.extraction = Some(ex);
    }
    Ok(trace)
}

/// Follows the smallest acceptable part of the last condition back through
/// the witnesses and returns its stem padded with zeros: the least set
/// satisfying every condition on its chain part.
///
/// Checks that the chain's Mathias classes are nested and contain `G`.
pub fn select_path_and_extract_g(trace: &Trace, scope: &Scope<'_>) -> Result<Extraction> {
    let t = trace.header.schedule.acceptability_threshold();
    let initial = Condition::initial(&scope.layout);
    let conds: Vec<&Condition> = std::iter::once(&initial)
        .chain(trace.stages.iter().map(|r| &r.condition))
        .collect();
    let last = conds[conds.len() - 1];
    let top = *acceptable_parts(last, scope.grounds, &scope.layout, t)
        .iter()
        .next()
        .ok_or(Error::NoAcceptableChain)?;
    let mut chain = vec![top];
    for rec in trace.stages.iter().rev() {
        let i = *chain.last().expect("nonempty");
        chain.push(rec.witness.get(i));
    }
    chain.reverse();
    let g = last.stems[top].padded(scope.universe());
    for (s, (c, &i)) in conds.iter().zip(&chain).enumerate() {
        if !satisfies_on_part(&g, c, i, &scope.layout) {
            return Err(Error::Verification {
                stage: s,
                what: format!("G does not satisfy part {i}"),
            });
        }
        if s > 0 {
            let (p, pi) = (conds[s - 1], chain[s - 1]);
            let outer = p.overwritten_reservoirs(pi, &scope.layout);
            let nested = p.stems[pi].is_prefix_of(&c.stems[i])
                && c
                    .overwritten_reservoirs(i, &scope.layout)
                    .iter()
                    .all(|y| outer.iter().any(|x| y.subset_leq(x)));
            if !nested {
                return Err(Error::Verification {
                    stage: s,
                    what: format!("class of part {i} is not inside class of part {pi}"),
                });
            }
        }
    }
    Ok(Extraction { chain, g })
}

/// Checks every scheduled requirement on `g`.
pub fn verify_requirements(g: &BitString, scope: &Scope<'_>, schedule: &Schedule) -> Result<Report> {
    if g.len() != scope.universe() {
        return Err(Error::Length(format!(
            "G has length {}, universe is {}",
            g.len(),
            scope.universe()
        )));
    }
    let mut checks = Vec::new();
    for req in &schedule.requirements {
        checks.push(match *req {
            Requirement::Q { m } => {
                let in_a = g.and(&scope.grounds.a).count_ones();
                let in_abar = g.count_ones() - in_a;
                RequirementCheck {
                    requirement: *req,
                    satisfied: in_a >= m && in_abar >= m,
                    counts: Some((in_a, in_abar)),
                    witness: None,
                }
            }
            Requirement::R { e, i } => {
                let w = r_witness(g, Pair::new(e, i), scope)?;
                RequirementCheck {
                    requirement: *req,
                    satisfied: w.is_some(),
                    counts: None,
                    witness: w,
                }
            }
        });
    }
    Ok(Report { checks })
}

/// Re-verifies a trace from its header alone: every stage is replayed
/// structurally (validity, extension, acceptability, per-stage forcing) and
/// the extraction and report are recomputed and compared.
pub fn check_trace(trace: &Trace) -> Result<()> {
    let schedule = &trace.header.schedule;
    let grounds = GroundSets::new(trace.header.a.clone(), trace.header.c.clone())?;
    let registry = Registry::parse(&trace.header.registry, grounds.universe())?;
    let scope = schedule.scope(&registry, &grounds);
    let t = schedule.acceptability_threshold();
    let mut prev = Condition::initial(&scope.layout);
    for (s, rec) in trace.stages.iter().enumerate() {
        let fail = |what: String| Error::Verification { stage: s, what };
        if rec.stage != s || schedule.requirements.get(s) != Some(&rec.requirement) {
            return Err(fail("record does not match the schedule".into()));
        }
        let acc = verify_stage(s, &rec.condition, &prev, &rec.witness, &scope, t)?;
        if acc != rec.acceptable {
            return Err(fail("recorded acceptable parts differ".into()));
        }
        if rec.k_before != prev.k() || rec.k_after != rec.condition.k() {
            return Err(fail("recorded part counts differ".into()));
        }
        let last = s + 1 == trace.stages.len();
        match rec.requirement {
            Requirement::Q { m } => {
                for &i in &rec.forced_parts {
                    if !forces_qm(&rec.condition, i, &grounds, m)? {
                        return Err(fail(format!("part {i} does not force Q_{m}")));
                    }
                }
            }
            Requirement::R { e, i } => {
                let settled = !last || trace.outcome == Outcome::Complete;
                if settled && !unforced_parts(&rec.condition, Pair::new(e, i), &scope)?.is_empty() {
                    return Err(fail(format!("some part does not force R_{{{e},{i}}}")));
                }
            }
        }
        prev = rec.condition.clone();
    }
    if trace.outcome == Outcome::Complete {
        if trace.stages.len() != schedule.requirements.len() {
            return Err(Error::Verification {
                stage: trace.stages.len(),
                what: "complete trace is missing stages".into(),
            });
        }
        let ex = select_path_and_extract_g(trace, &scope)?;
        if trace.extraction.as_ref() != Some(&ex) {
            return Err(Error::Verification {
                stage: trace.stages.len(),
                what: "recorded extraction differs".into(),
            });
        }
        let report = verify_requirements(&ex.g, &scope, schedule)?;
        if trace.report.as_ref() != Some(&report) || !report.all_satisfied() {
            return Err(Error::Verification {
                stage: trace.stages.len(),
                what: "requirements fail on the extracted set".into(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FunctionalTable;

    #[test]
    fn cantor_order() {
        let got: Vec<_> = (0..6).map(cantor_unpair).collect();
        assert_eq!(got, [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }

    #[test]
    fn alternating_schedule() {
        let s = Schedule::alternating(&[Pair::new(0, 1), Pair::new(2, 3)], 2, 4, 1);
        let shown: Vec<String> = s.requirements.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["Q_0", "R_{0,1}", "Q_1", "R_{2,3}", "Q_2"]);
    }

    #[test]
    fn q_only_run() {
        let a: BitString = "1010101010101010".parse().unwrap();
        let grounds = GroundSets::new(a, BitString::zeros(16)).unwrap();
        let reg = Registry::new(16, 2);
        let schedule = Schedule::alternating(&[], 3, 4, 1);
        let trace = run_construction(&grounds, &reg, &schedule).unwrap();
        assert_eq!(trace.outcome, Outcome::Complete);
        let g = &trace.extraction.as_ref().unwrap().g;
        assert!(g.and(&grounds.a).count_ones() >= 3);
        assert!(trace.report.as_ref().unwrap().all_satisfied());
        check_trace(&trace).unwrap();
    }

    #[test]
    fn empty_registry_run() {
        let a: BitString = "1001011001101001".parse().unwrap();
        let grounds = GroundSets::new(a, BitString::zeros(16)).unwrap();
        let mut reg = Registry::new(16, 2);
        reg.add(FunctionalTable::new(0));
        reg.add(FunctionalTable::new(1));
        let schedule = Schedule::alternating(&[Pair::new(0, 1)], 1, 2, 1);
        let trace = run_construction(&grounds, &reg, &schedule).unwrap();
        assert_eq!(trace.outcome, Outcome::Complete);
        assert_eq!(trace.stages[1].tag, StepTag::AlreadyForced);
        check_trace(&trace).unwrap();
    }
}
