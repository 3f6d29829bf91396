//! The first dichotomy step from the trivial one-part condition when no
//! functional ever halts: three pairwise incompatible valuations, a cross of
//! their classes into six parts, every part mapped back to part 0.

use std::collections::BTreeSet;

use tree_forcing::dichotomy::{case_ii_extension, dichotomy_search, SearchOutcome};
use tree_forcing::forcing::{extends, forces_r_at_horizon};
use tree_forcing::instances::empty_registry;
use tree_forcing::{BitString, Condition, GroundSets, Pair, Scope};

fn main() -> tree_forcing::Result<()> {
    let grounds = GroundSets::new("110100".parse()?, BitString::zeros(6))?;
    let registry = empty_registry(6, 2, 3);
    let scope = Scope::new(&registry, &grounds, 1, 1);
    let pair = Pair::new(0, 1);
    let c = Condition::initial(&scope.layout);
    println!("{} cells, {} paths in the initial class", scope.cells(), c.tree.path_count());

    let u = BTreeSet::from([0]);
    let SearchOutcome::CaseII { valuations, witnesses } = dichotomy_search(&c, pair, &u, &scope, scope.cells())? else {
        unreachable!("nothing halts, so nothing disagrees");
    };
    println!("witnesses {witnesses:?}");
    for p in &valuations {
        println!("  valuation {p}");
    }

    let (d, f) = case_ii_extension(&c, &valuations, pair, &u, &scope)?;
    println!("extension: {} parts, {} paths, witness {:?}", d.k(), d.tree.path_count(), f.0);
    assert_eq!(d.k(), 6);
    assert!(f.0.iter().all(|&j| j == 0));
    assert!(extends(&d, &c, &f, &scope.layout));
    for j in 0..d.k() {
        assert!(forces_r_at_horizon(&d, j, pair, &scope)?);
    }
    println!("extends the initial condition and forces R on every part");
    Ok(())
}
