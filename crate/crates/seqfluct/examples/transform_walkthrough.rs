//! The two random transformations, their exact outcome laws, preimages, and
//! the exact conditional expected score gain.
//!
//! ```bash
//! cargo run --release --example transform_walkthrough
//! ```

use seqfluct::{
    pair_score, Alphabet, RandomStream, ScoringScheme, SequencePair, Transform,
};

fn main() {
    let al = Alphabet::binary();
    let lcs = ScoringScheme::lcs(2).unwrap();

    // block transformation: one run of length l-1 and one of length l+1 in x
    // both become runs of length l; y is untouched
    let x = al.parse("0011100111100").unwrap();
    let z = SequencePair::new(x.clone(), al.parse("0101101001011").unwrap()).unwrap();
    let t = Transform::BlockTransform { l: 3 };
    println!("x  = {}", z.x);
    let outcomes = t.outcomes(&z).unwrap();
    for (zt, p) in &outcomes.items {
        println!("x~ = {}  with probability {p}", zt.x);
    }
    println!(
        "exact E[L(Z~) - L(Z) | Z = z] = {}",
        t.expected_gain(&z, &lcs).unwrap()
    );
    println!(
        "every outcome keeps (t, r) and moves u by +4; score never drops below -1"
    );

    // preimages: all states that could have produced a given outcome
    let mut rng = RandomStream::root(3);
    let zt = t.apply(&z, &mut rng).unwrap();
    let pre = t.preimages(&zt);
    println!(
        "\napplied once: x~ = {} ({} preimages, 2 * C(b_l, 2) of its l-runs)",
        zt.x,
        pre.len()
    );

    // letter swap on an i.i.d.-style pair over {a, b}
    let al2 = Alphabet::from_chars("ab").unwrap();
    let z2 = SequencePair::new(al2.parse("abab").unwrap(), al2.parse("bbaa").unwrap()).unwrap();
    let swap = Transform::LetterSwap { a: 0, b: 1 };
    let lcs2 = ScoringScheme::lcs(2).unwrap();
    println!("\nswap a -> b on ({}, {}):", z2.x, z2.y);
    let base = pair_score(&z2, &lcs2).unwrap();
    for (zt, p) in &swap.outcomes(&z2).unwrap().items {
        println!(
            "  ({}, {})  prob {p}  gain {}",
            zt.x,
            zt.y,
            pair_score(zt, &lcs2).unwrap() - base
        );
    }
    println!(
        "exact expected gain = {}",
        swap.expected_gain(&z2, &lcs2).unwrap()
    );
}
