//! One R stage on a 16-position instance: the disagreement set E, the class
//! S_p of a valuation, the Case I extension, then the full stage loop.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tree_forcing::dichotomy::{case_i_extension, dichotomy_search, force_r_extension, SearchOutcome};
use tree_forcing::forcing::unforced_parts;
use tree_forcing::instances::{hitting_registry, random_grounds};
use tree_forcing::valuation::{build_sp_tree, enumerate_e};
use tree_forcing::{Condition, Scope, Valuation};

fn main() -> tree_forcing::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grounds = random_grounds(&mut rng, 16);
    println!("A = {}", grounds.a);
    let (registry, pairs) = hitting_registry(&grounds, 2, &[true, false], 2, 3);
    print!("{}", registry.to_text());
    let scope = Scope::new(&registry, &grounds, 2, 1);
    let c = Condition::initial(&scope.layout);

    for &pair in &pairs {
        let u: BTreeSet<usize> = unforced_parts(&c, pair, &scope)?;
        println!("\npair {pair:?}: unforced parts {u:?}");
        let e = enumerate_e(&c, pair, &u, &scope, scope.cells())?;
        let shown: Vec<String> = e.discovered.iter().map(ToString::to_string).collect();
        println!("  E = {shown:?}");
        for p in Valuation::canonical_up_to(1).iter().filter(|p| p.len() == 1) {
            let s = build_sp_tree(&c, p, pair, &u, &scope, scope.cells())?;
            println!("  S_{p}: {} paths, in E: {}", s.path_count(), e.contains(p));
        }
        match dichotomy_search(&c, pair, &u, &scope, scope.cells())? {
            SearchOutcome::CaseI { p } => {
                let step = case_i_extension(&c, &p, pair, &u, &scope)?;
                println!(
                    "  Case I with {p}: part {} stem {} secures input {} on the {:?} side",
                    step.part, step.condition.stems[step.part], step.n, step.half
                );
            }
            other => println!("  {other:?}"),
        }
        let ext = force_r_extension(&c, pair, &scope, scope.cells())?;
        for step in &ext.steps {
            println!("  round {}: {:?}, U {:?} -> {:?}", step.round, step.tag, step.u_before, step.u_after);
        }
        println!("  status {:?}", ext.status);
    }
    Ok(())
}
