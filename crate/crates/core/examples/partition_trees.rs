//! Finite partition classes: building trees from paths, pruning, refining
//! below a stem, and crossing three classes.

use tree_forcing::ptree::{cross_trees, RefineMode};
use tree_forcing::{BitString, Layout, PartitionTree};

fn main() -> tree_forcing::Result<()> {
    let full = PartitionTree::full(2, 2);
    println!("full 2-part tree of depth 2: {} paths", full.path_count());

    let paths: Vec<BitString> = ["1010", "1001", "1111"]
        .iter()
        .map(|s| s.parse())
        .collect::<tree_forcing::Result<_>>()?;
    let t = PartitionTree::from_paths(2, 2, paths)?;
    print!("{}", t.to_text());

    // keep paths whose part 0 contains the stem 11
    let layout = Layout::plain(2);
    let tau: BitString = "11".parse()?;
    let refined = t.refine_below(0, &tau, &BitString::new(), RefineMode::Subset, &layout)?;
    println!("paths with 11 inside part 0: {:?}", refined.paths().map(ToString::to_string).collect::<Vec<_>>());

    let single = PartitionTree::from_paths(2, 2, ["1001".parse::<BitString>()?])?;
    let crossed = cross_trees(&[t.clone(), single.clone(), full])?;
    let tuples = t.path_count() * single.path_count() * 9;
    println!("cross: k = {}, {} distinct paths from {tuples} path tuples", crossed.k(), crossed.path_count());
    for d in 0..=2 {
        println!("  depth {d}: {} nodes", crossed.paths_at_depth(d).len());
    }
    Ok(())
}
