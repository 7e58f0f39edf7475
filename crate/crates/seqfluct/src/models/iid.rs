//! The i.i.d. sequence model and its driving statistics.

use crate::rng::RandomStream;
use crate::seq::{Alphabet, Sequence, SequencePair, SymbolDist};
use std::sync::Arc;

/// Sample `n` independent draws from `dist` over `alphabet`.
pub fn sample_iid(
    n: usize,
    dist: &SymbolDist,
    alphabet: &Arc<Alphabet>,
    rng: &mut RandomStream,
) -> Sequence {
    let data = (0..n).map(|_| dist.draw(rng)).collect();
    Sequence::from_indices(Arc::clone(alphabet), data).expect("draws are valid indices")
}

/// `(u, v) = (N_b, N_a + N_b)`: counts of the two designated letters across
/// both strings of the pair.
pub fn iid_uv(z: &SequencePair, a: usize, b: usize) -> (i64, i64) {
    let nb = z.count(b as u8) as i64;
    let na = z.count(a as u8) as i64;
    (nb, na + nb)
}

/// Enumerate all `|A|^n` sequences with their product probabilities.
pub fn enumerate_iid_x(
    dist: &SymbolDist,
    alphabet: &Arc<Alphabet>,
    n: usize,
) -> Vec<(Sequence, f64)> {
    let k = alphabet.size();
    let total = (k as u128).pow(n as u32);
    let mut out = Vec::with_capacity(total as usize);
    let mut data = vec![0u8; n];
    loop {
        let prob: f64 = data.iter().map(|&c| dist.prob(c as usize)).product();
        out.push((
            Sequence::from_indices(Arc::clone(alphabet), data.clone()).expect("valid indices"),
            prob,
        ));
        // odometer increment in base k, most significant digit first
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (data[pos] as usize) + 1 < k {
                data[pos] += 1;
                break;
            }
            data[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn fixed_seed_gives_identical_sequences() {
        let al = Alphabet::from_chars("abc").unwrap();
        let d = SymbolDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        let a = sample_iid(64, &d, &al, &mut RandomStream::substream(9, 4));
        let b = sample_iid(64, &d, &al, &mut RandomStream::substream(9, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_frequencies_within_4_sigma() {
        let al = Alphabet::from_chars("abc").unwrap();
        let d = SymbolDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        let n = 1_000_000;
        let x = sample_iid(n, &d, &al, &mut RandomStream::root(2));
        for sym in 0..3usize {
            let freq = x.count(sym as u8) as f64 / n as f64;
            let p = d.prob(sym);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * sigma, "symbol {sym}: {freq} vs {p}");
        }
    }

    #[test]
    fn uv_counts_letters_across_both_strings() {
        let al = Alphabet::from_chars("ab").unwrap();
        let z = SequencePair::new(al.parse("ab").unwrap(), al.parse("bb").unwrap()).unwrap();
        assert_eq!(iid_uv(&z, 0, 1), (3, 4));

        let al3 = Alphabet::from_chars("abc").unwrap();
        let z3 = SequencePair::new(al3.parse("cc").unwrap(), al3.parse("cc").unwrap()).unwrap();
        assert_eq!(iid_uv(&z3, 0, 1), (0, 0));
    }

    #[test]
    fn enumeration_is_complete_and_normalised() {
        let al = Alphabet::from_chars("abc").unwrap();
        let d = SymbolDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        let all = enumerate_iid_x(&d, &al, 3);
        assert_eq!(all.len(), 27);
        let total: f64 = all.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
