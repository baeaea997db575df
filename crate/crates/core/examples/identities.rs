//! Checks the nested-summation decompositions against the flat sum on
//! random tensors, and the exact integer identities behind them.
//!
//! cargo run --release --example identities -- [trials] [seed]

use plmi::combinat::{multiplicity_factorial, stirling2};
use plmi::oracle::{identity_case, integer_checks};

fn main() -> plmi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);

    let ints = integer_checks(8, 12)?;
    let ok = ints.iter().filter(|c| c.passed()).count();
    println!("integer identities: {ok}/{} (q <= 8, r <= 12)", ints.len());
    println!(
        "s(8, k) = {:?}",
        (0..=8).map(|k| stirling2(8, k)).collect::<plmi::Result<Vec<_>>>()?
    );

    println!("{:>2} {:>2} {:>12} exact", "q", "r", "residual");
    for q in 3..=5 {
        for r in 2..=4 {
            let case = identity_case(q, r, trials, seed, &multiplicity_factorial)?;
            println!("{q:>2} {r:>2} {:>12.3e} {}", case.max_residual, case.exact_zero);
        }
    }

    // dropping the symmetry factor breaks the identity
    let bad = identity_case(4, 3, 1, seed, &|_| 1)?;
    println!("without mu(lambda)!: residual {:.3e}", bad.max_residual);
    Ok(())
}
