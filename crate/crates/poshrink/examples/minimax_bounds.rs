//! Near-minimaxity: the Jeffreys-prior predictive risk sits between the
//! minimax lower bound 0.5 Σ log((r_i+s_i)/r_i) and 1.04 times it, for any
//! durations. Prints the squeeze for a few settings.
//!
//! Run with: cargo run --example minimax_bounds

use poshrink::problem::ProblemSpec;
use poshrink::risk::{kl_risk_power, lemma_l, minimax_bounds};

fn main() -> poshrink::Result<()> {
    println!(
        "{:>3} {:>6} {:>6} {:>10} {:>10} {:>10}",
        "d", "r", "s", "lower", "risk@big", "upper"
    );
    for (d, r, s) in [(1, 1.0, 1.0), (3, 1.0, 1.0), (2, 2.0, 1.0), (4, 0.5, 2.0)] {
        let spec = ProblemSpec::uniform(d, r, s)?;
        let (lower, upper) = minimax_bounds(&spec);
        // at large rates the risk approaches the lower bound from above
        let risk = kl_risk_power(&vec![500.0; d], &vec![0.5; d], &spec)?;
        println!(
            "{d:>3} {r:>6.1} {s:>6.1} {lower:>10.5} {:>10.5} {upper:>10.5}",
            risk.value
        );
        assert!(risk.value <= upper && risk.value >= lower);
    }

    // the truncated lower-bound function behind the squeeze
    println!("\ntruncated lower-bound function:");
    for l in [3.0, 4.0, 5.0] {
        println!("  L({l}) = {:+.6}", lemma_l(l, 20)?);
    }
    Ok(())
}
