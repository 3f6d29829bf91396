//! When every incorrect valuation is refuted outright, the disagreement set
//! computes a function avoiding the diagonal. The search reports it instead
//! of extending.

use std::collections::BTreeSet;

use tree_forcing::dichotomy::{dichotomy_search, SearchOutcome};
use tree_forcing::instances::pa_like_registry;
use tree_forcing::{BitString, Condition, GroundSets, Pair, Scope};

fn main() -> tree_forcing::Result<()> {
    let diag = [true, false, false, true];
    let registry = pa_like_registry(16, &diag);
    let grounds = GroundSets::new(BitString::from_bools((0..16).map(|x| x % 3 == 0)), BitString::zeros(16))?;
    let scope = Scope::new(&registry, &grounds, 2, 3);
    let c = Condition::initial(&scope.layout);
    match dichotomy_search(&c, Pair::new(0, 1), &BTreeSet::from([0]), &scope, scope.cells())? {
        SearchOutcome::HypothesisViolated { h, reason, .. } => {
            println!("hypothesis violated: {reason}");
            println!("h = {h}");
            for (n, v) in &h.0 {
                println!("  h({n}) = {}, diagonal {:?}", u8::from(*v), registry.diag_value(*n).map(u8::from));
                assert_ne!(registry.diag_value(*n), Some(*v));
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
