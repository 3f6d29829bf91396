//! Ordered partitions as interleaved bit strings, and the pigeonhole behind
//! the cross: five ordered 4-partitions always cross to a covering
//! 40-partition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tree_forcing::bitvec::{deinterleave, interleave};
use tree_forcing::ptree::{cross_codes, cross_part_index, is_partition_code};
use tree_forcing::BitString;

fn main() -> tree_forcing::Result<()> {
    let evens: BitString = "10101010".parse()?;
    let odds = evens.complement();
    let code = interleave(&[evens.clone(), odds.clone()])?;
    println!("evens | odds as a 2-partition: {code}");
    assert_eq!(deinterleave(&code, 2)?, vec![evens.clone(), odds]);

    // X/σ replaces a prefix
    let sigma: BitString = "011".parse()?;
    println!("{evens} / {sigma} = {}", evens.overwrite(&sigma)?);

    // three ordered 2-partitions of a 4-element universe
    let codes: Vec<BitString> = ["10011001", "11100110", "01101011"]
        .iter()
        .map(|s| s.parse())
        .collect::<tree_forcing::Result<_>>()?;
    let crossed = cross_codes(&codes, 2)?;
    println!("cross of three 2-partitions: {crossed} (covering: {})", is_partition_code(&crossed, 6)?);
    for part in deinterleave(&crossed, 6)?.iter().enumerate() {
        println!("  part {}: {}", part.0, part.1);
    }
    println!("part (j=1, p=0, q=2) sits at index {}", cross_part_index(1, 0, 2, 3));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut covering = 0;
    for _ in 0..1000 {
        let parts: Vec<BitString> = (0..5)
            .map(|_| {
                // each position picks one of four parts
                let choice: Vec<usize> = (0..64).map(|_| rand::Rng::gen_range(&mut rng, 0..4)).collect();
                let sets: Vec<BitString> = (0..4)
                    .map(|j| BitString::from_bools(choice.iter().map(|&c| c == j)))
                    .collect();
                interleave(&sets).expect("equal lengths")
            })
            .collect();
        covering += usize::from(is_partition_code(&cross_codes(&parts, 4)?, 40)?);
    }
    println!("{covering}/1000 random crosses of five 4-partitions of 64 cover");
    Ok(())
}
