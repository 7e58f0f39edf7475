//! The headline check: Var[L_n] grows linearly in n for both models.
//!
//! ```bash
//! cargo run --release --example variance_scan
//! ```

use seqfluct::estimators::variance_scan;
use seqfluct::{Alphabet, BlockModelParams, Model, ScoringScheme, SymbolDist};

fn main() {
    let samples = 10_000;

    // LCS of block sequences
    let block = Model::block(BlockModelParams::equiprobable(3).unwrap());
    let lcs = ScoringScheme::lcs(2).unwrap();
    println!("block model, LCS scoring ({samples} samples per n):");
    let scan = variance_scan(&block, &lcs, &[200, 400, 800, 1600], samples, 1).unwrap();
    for row in &scan.rows {
        println!(
            "  n = {:>5}: Var = {:8.3} +- {:.3}   Var/n = {:.5}",
            row.n, row.var_hat, row.ci95, row.ratio
        );
    }
    println!(
        "  slope {:.5}, Var/n spread {:.3}",
        scan.slope,
        scan.ratio_max / scan.ratio_min
    );

    // general scoring of i.i.d. sequences with a strong gap penalty
    let al = Alphabet::from_chars("abc").unwrap();
    let dist = SymbolDist::new(vec![0.2, 0.5, 0.3]).unwrap();
    let iid = Model::iid(al, dist, 0, 1).unwrap();
    let scheme = ScoringScheme::new(
        vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.5],
            vec![0.0, 0.5, 1.0],
        ],
        -2.0,
    )
    .unwrap();
    println!("\niid model, general scheme with gap price -2:");
    let scan2 = variance_scan(&iid, &scheme, &[100, 200, 400], samples, 2).unwrap();
    for row in &scan2.rows {
        println!(
            "  n = {:>5}: Var = {:8.3} +- {:.3}   Var/n = {:.5}",
            row.n, row.var_hat, row.ci95, row.ratio
        );
    }
    println!(
        "  slope {:.5}, Var/n spread {:.3}",
        scan2.slope,
        scan2.ratio_max / scan2.ratio_min
    );
}
