//! Optimal alignment scoring: the LCS scheme, general score tables with gap
//! prices, the exhaustive oracle, and the edit-stability bound.
//!
//! ```bash
//! cargo run --release --example score_sequences
//! ```

use seqfluct::{
    brute_force_score, lcs_length, optimal_score, Alphabet, RandomStream, ScoringScheme, Sequence,
};
use std::sync::Arc;

fn main() {
    let al = Alphabet::binary();
    let x = al.parse("100101100001101").unwrap();
    let y = al.parse("111000010101110").unwrap();
    println!("x = {x}\ny = {y}");
    println!("LCS length (word-parallel): {}", lcs_length(&x, &y).unwrap());

    // the same value through the general DP with the LCS scheme
    let lcs = ScoringScheme::lcs(2).unwrap();
    println!(
        "optimal score under the LCS scheme: {}",
        optimal_score(&x, &y, &lcs).unwrap().value
    );

    // a general scheme: matches worth 2/3, mismatches 1, gaps priced -1
    let scheme = ScoringScheme::new(vec![vec![2.0, 1.0], vec![1.0, 3.0]], -1.0).unwrap();
    let score = optimal_score(&x, &y, &scheme).unwrap();
    println!(
        "general scheme (delta = {}): L_{} = {}",
        scheme.delta(),
        score.n,
        score.value
    );

    // positive gap prices are allowed as long as delta <= max entry
    let generous = ScoringScheme::new(vec![vec![2.0, 1.0], vec![1.0, 3.0]], 0.5).unwrap();
    println!(
        "positive gap price 0.5: L = {}",
        optimal_score(&x, &y, &generous).unwrap().value
    );

    // the DP agrees with full alignment enumeration on small inputs
    let mut rng = RandomStream::root(7);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.below(9);
        let a = Sequence::from_indices(
            Arc::clone(&al),
            (0..n).map(|_| rng.below(2) as u8).collect(),
        )
        .unwrap();
        let b = Sequence::from_indices(
            Arc::clone(&al),
            (0..n).map(|_| rng.below(2) as u8).collect(),
        )
        .unwrap();
        let fast = optimal_score(&a, &b, &scheme).unwrap().value;
        let slow = brute_force_score(&a, &b, &scheme).unwrap().value;
        worst = worst.max((fast - slow).abs());
    }
    println!("max |DP - exhaustive| over 200 random pairs (n <= 8): {worst}");

    // editing one letter moves the score by at most the largest table entry
    let base = optimal_score(&x, &y, &scheme).unwrap().value;
    let edited = x.with_symbol(3, 1);
    let moved = optimal_score(&edited, &y, &scheme).unwrap().value;
    println!(
        "single edit: {base} -> {moved} (|change| <= A = {})",
        scheme.a_max()
    );
}
