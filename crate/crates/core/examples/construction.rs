//! End-to-end run: random A and C over 64 positions, three functional pairs,
//! a schedule through Q_3, then extraction and requirement checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tree_forcing::driver::check_trace;
use tree_forcing::instances::{hitting_registry, random_grounds};
use tree_forcing::{run_construction, Schedule};

fn main() -> tree_forcing::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grounds = random_grounds(&mut rng, 64);
    let depth = 4;
    let (registry, pairs) = hitting_registry(&grounds, 3, &[true, false, false, true], depth, 8);
    let schedule = Schedule::alternating(&pairs, 3, depth, 3);

    let start = std::time::Instant::now();
    let trace = run_construction(&grounds, &registry, &schedule)?;
    for rec in &trace.stages {
        println!(
            "stage {:>2} {:<8} {:?}: k {} -> {}, acceptable {:?}",
            rec.stage,
            rec.requirement.to_string(),
            rec.tag,
            rec.k_before,
            rec.k_after,
            rec.acceptable
        );
    }
    println!("outcome: {:?}", trace.outcome);
    if let (Some(ex), Some(report)) = (&trace.extraction, &trace.report) {
        println!("chain {:?}", ex.chain);
        println!("G = {}", ex.g);
        for c in &report.checks {
            println!("  {:<8} {} {:?} {:?}", c.requirement.to_string(), c.satisfied, c.counts, c.witness);
        }
    }
    check_trace(&trace)?;
    println!("trace re-verified in {:.2?}", start.elapsed());
    Ok(())
}
