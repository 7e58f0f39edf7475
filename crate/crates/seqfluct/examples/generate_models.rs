//! The two sequence models: i.i.d. over a general alphabet and the
//! 3-multinomial block model, with their driving statistics and typical
//! windows.
//!
//! ```bash
//! cargo run --release --example generate_models
//! ```

use seqfluct::models::{block_seq_prob, block_stats, tur_pmf, uv_from_blocks};
use seqfluct::{Alphabet, BlockModelParams, Model, RandomStream, SymbolDist};

fn main() {
    // i.i.d. letters over {a, b, *}; the swap letters are a and b
    let al = Alphabet::from_chars("ab*").unwrap();
    let dist = SymbolDist::new(vec![0.25, 0.25, 0.5]).unwrap();
    let iid = Model::iid(al, dist, 0, 1).unwrap();
    let mut rng = RandomStream::root(42);
    let z = iid.sample_pair(30, &mut rng);
    println!("iid pair:   x = {}\n            y = {}", z.x, z.y);
    let key = iid.uv_of(&z).unwrap();
    println!("statistics: {key}  (u counts b, v counts a and b, both strings)");

    // block sequences: alternating runs of lengths l-1, l, l+1
    let params = BlockModelParams::new(3, 0.2, 0.5, 0.3).unwrap();
    println!(
        "\nblock model: l = {}, q = {:?}, mean block length mu = {}",
        params.l(),
        params.q(),
        params.mu()
    );
    let block = Model::block(params.clone());
    let x = block.sample_x(48, &mut rng);
    println!("x = {x}");
    let stats = block_stats(&x, 3).unwrap();
    let (t, u, r) = uv_from_blocks(&stats, 48, 3).unwrap();
    println!(
        "runs: {} of length 2, {} of 3, {} of 4, trailing run {}  =>  (t, u, r) = ({t}, {u}, {r})",
        stats.b1, stats.b2, stats.b3, stats.r
    );
    println!("P(X = x) = {:.3e}", block_seq_prob(&x, &params).unwrap());
    println!(
        "P(T = {t}, U = {u}, R = {r}) = {:.3e}",
        tur_pmf(t, u, r, &params, 48)
    );

    // fibers of u at fixed v are a span-4 lattice
    let v = seqfluct::VKey::TR { t, r };
    println!("fiber of v = ({t}, {r}): {:?}", block.fiber(48, v));

    // typical windows scale like sqrt(n) around the exact centres
    for n in [100usize, 400, 1600] {
        let ts = block.typical_sets(n, 1.0);
        let (t_lo, t_hi) = ts.v_window();
        println!(
            "n = {n:>5}: T window [{t_lo:.1}, {t_hi:.1}], U window {:?}",
            ts.u_window(&v)
        );
    }
}
