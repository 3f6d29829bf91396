//! A set cohesive for six sets over 256 positions, with one diagonal hit
//! attempted per stage. Reads the sets and the registry from examples/data.

use std::fs;

use tree_forcing::cohesive::cohesive_construction;
use tree_forcing::{BitString, GroundSets, Registry};

fn main() -> tree_forcing::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let sets: Vec<BitString> = fs::read_to_string(format!("{dir}/sets256.txt"))?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::parse)
        .collect::<tree_forcing::Result<_>>()?;
    let registry = Registry::parse(&fs::read_to_string(format!("{dir}/cohesive256.reg"))?, 256)?;
    let grounds = GroundSets::new(BitString::zeros(256), BitString::zeros(256))?;

    let run = cohesive_construction(&sets, &grounds, &registry, 3)?;
    for (s, (z, rho)) in run.zs.iter().zip(&run.stems).enumerate() {
        let side = if z.subset_leq(&sets[s]) { "inside" } else { "outside" };
        let hit = run
            .hit_at(s)
            .map_or("no hit".to_string(), |h| format!("Φ_{} ({}) = {}", h.functional, h.n, u8::from(h.value)));
        println!("stage {s}: Z {side} C_{s}, |Z| = {:>3}, |ρ| = {:>3}, {hit}", z.count_ones(), rho.len());
    }
    println!("G = {:?}", run.g.ones_positions().collect::<Vec<_>>());
    println!("G almost inside every Z_s: {}", run.almost_inside());
    Ok(())
}
