//! Limit partition of a finite coloring of pairs: column n goes to the first
//! color when it is constant 1 on the late window.

use tree_forcing::cohesive::{limit_partition, StableColoringTable};

fn main() -> tree_forcing::Result<()> {
    // column n settles to 1 if n is prime, else to 2; columns divisible by 7
    // keep flipping
    let prime = |n: usize| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
    let f = StableColoringTable::from_fn(80, |m, n| {
        if n % 7 == 6 {
            1 + (m % 2) as u8
        } else if prime(n) {
            1
        } else {
            2
        }
    })?;
    let lp = limit_partition(&f, 30)?;
    println!("f1 = {:?}", lp.f1.ones_positions().collect::<Vec<_>>());
    println!("f2 = {:?}", lp.f2.ones_positions().collect::<Vec<_>>());
    println!("unstable columns = {:?}", lp.unstable);
    Ok(())
}
