mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use support::random_tree;
use tree_forcing::driver::check_trace;
use tree_forcing::instances::{hitting_registry, random_grounds, random_registry};
use tree_forcing::trace::{read_trace, trace_to_string};
use tree_forcing::{run_construction, PartitionTree, Registry, Schedule, Valuation};

proptest! {
    #[test]
    fn valuation_text(pairs in proptest::collection::btree_map(0usize..20, any::<bool>(), 0..6)) {
        let p = Valuation(pairs);
        let back: Valuation = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn tree_text_and_json(seed in any::<u64>(), k in 1usize..4, depth in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, k, depth, 5);
        prop_assert_eq!(&PartitionTree::from_text(&t.to_text()).unwrap(), &t);
        let json = serde_json::to_string(&t).unwrap();
        prop_assert_eq!(&serde_json::from_str::<PartitionTree>(&json).unwrap(), &t);
    }

    #[test]
    fn registry_text(seed in any::<u64>(), universe in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = random_registry(&mut rng, universe, 3, 3, 2, 3);
        let back = Registry::parse(&reg.to_text(), universe).unwrap();
        prop_assert_eq!(back.to_text(), reg.to_text());
    }
}

#[test]
fn trace_survives_json_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grounds = random_grounds(&mut rng, 48);
    let (reg, pairs) = hitting_registry(&grounds, 2, &[false, true, true], 3, 6);
    let schedule = Schedule::alternating(&pairs, 2, 3, 2);
    let trace = run_construction(&grounds, &reg, &schedule).unwrap();
    let text = trace_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), trace.stages.len() + 2);
    let back = read_trace(text.as_bytes()).unwrap();
    assert_eq!(trace_to_string(&back).unwrap(), text);
    check_trace(&back).unwrap();
}

#[test]
fn malformed_trace_lines_are_errors() {
    assert!(read_trace("not json\n".as_bytes()).is_err());
    assert!(read_trace("".as_bytes()).is_err());
}
