//! Optimal alignment score under a general scoring scheme.
//!
//! The score of an alignment with `k` matched pairs is
//! `sum S(x_i, y_j) + delta * (n - k)`, maximised over all pairs of strictly
//! increasing index sequences. Every unmatched index pair contributes the gap
//! price exactly once, so the maximum equals `delta * n` plus a standard
//! three-way DP over per-cell gains `S(a, b) - delta` with zero boundary (the
//! boundary admits the empty alignment). When the table and gap price are all
//! integers the DP runs over `i64`, so comparisons against the exhaustive
//! oracle are exact; the LCS scheme takes a word-parallel fast path.

use crate::error::{Error, Result};
use crate::scoring::ScoringScheme;
use crate::seq::{Sequence, SequencePair};

/// Largest `n` the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// An optimal-score value together with the sequence length it refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentScore {
    pub value: f64,
    pub n: usize,
}

fn check_pair(x: &Sequence, y: &Sequence, scheme: &ScoringScheme) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "|x| = {} but |y| = {}",
            x.len(),
            y.len()
        )));
    }
    if x.alphabet() != y.alphabet() {
        return Err(Error::AlphabetMismatch(
            "x and y use different alphabets".into(),
        ));
    }
    if x.alphabet().size() != scheme.size() {
        return Err(Error::Dimension(format!(
            "alphabet of size {} scored with a {}-symbol table",
            x.alphabet().size(),
            scheme.size()
        )));
    }
    Ok(())
}

/// Optimal alignment score of `x` and `y` under `scheme`.
pub fn optimal_score(x: &Sequence, y: &Sequence, scheme: &ScoringScheme) -> Result<AlignmentScore> {
    check_pair(x, y, scheme)?;
    let n = x.len();
    if scheme.is_lcs() && scheme.size() <= 64 {
        return Ok(AlignmentScore {
            value: lcs_bitparallel(x.indices(), y.indices(), scheme.size()) as f64,
            n,
        });
    }
    let value = if scheme.is_integral() {
        dp_integer(x.indices(), y.indices(), scheme) as f64 + scheme.delta() * n as f64
    } else {
        dp_float(x.indices(), y.indices(), scheme) + scheme.delta() * n as f64
    };
    Ok(AlignmentScore { value, n })
}

/// Convenience wrapper for `optimal_score` on a pair.
pub fn pair_score(z: &SequencePair, scheme: &ScoringScheme) -> Result<f64> {
    Ok(optimal_score(&z.x, &z.y, scheme)?.value)
}

fn dp_float(x: &[u8], y: &[u8], scheme: &ScoringScheme) -> f64 {
    let n = y.len();
    let delta = scheme.delta();
    let mut prev = vec![0.0_f64; n + 1];
    let mut cur = vec![0.0_f64; n + 1];
    for &a in x {
        for (j, &b) in y.iter().enumerate() {
            let diag = prev[j] + scheme.score(a, b) - delta;
            cur[j + 1] = diag.max(prev[j + 1]).max(cur[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

fn dp_integer(x: &[u8], y: &[u8], scheme: &ScoringScheme) -> i64 {
    let n = y.len();
    let delta = scheme.delta() as i64;
    let size = scheme.size();
    let gain: Vec<i64> = (0..size * size)
        .map(|i| scheme.score((i / size) as u8, (i % size) as u8) as i64 - delta)
        .collect();
    let mut prev = vec![0_i64; n + 1];
    let mut cur = vec![0_i64; n + 1];
    for &a in x {
        let row = &gain[a as usize * size..(a as usize + 1) * size];
        for (j, &b) in y.iter().enumerate() {
            let diag = prev[j] + row[b as usize];
            cur[j + 1] = diag.max(prev[j + 1]).max(cur[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Exhaustive oracle: enumerate every alignment, including the empty one,
/// and return the maximum score. Refuses `n > 12`.
pub fn brute_force_score(
    x: &Sequence,
    y: &Sequence,
    scheme: &ScoringScheme,
) -> Result<AlignmentScore> {
    check_pair(x, y, scheme)?;
    let n = x.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Guard(format!(
            "brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    // Index subsets grouped by size; equal-size subsets of x- and y-positions
    // paired in order give exactly the alignments.
    let mut subsets: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n + 1];
    for mask in 0..(1u32 << n) {
        let idx: Vec<u8> = (0..n as u8).filter(|&i| mask >> i & 1 == 1).collect();
        subsets[idx.len()].push(idx);
    }
    let delta = scheme.delta();
    let xs = x.indices();
    let ys = y.indices();
    let mut best = delta * n as f64; // empty alignment
    for k in 1..=n {
        let gaps = delta * (n - k) as f64;
        for rho in &subsets[k] {
            for tau in &subsets[k] {
                let mut s = gaps;
                for (&i, &j) in rho.iter().zip(tau) {
                    s += scheme.score(xs[i as usize], ys[j as usize]);
                }
                if s > best {
                    best = s;
                }
            }
        }
    }
    Ok(AlignmentScore { value: best, n })
}

/// LCS length via the word-parallel column update
/// `V' = (V + (V & M)) | (V & !M)`; zero bits of `V` over the first `m`
/// positions count the matches. Falls back to the integer DP for alphabets
/// wider than one mask table row per symbol is worth (`> 64` symbols).
pub fn lcs_length(x: &Sequence, y: &Sequence) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "|x| = {} but |y| = {}",
            x.len(),
            y.len()
        )));
    }
    if x.alphabet() != y.alphabet() {
        return Err(Error::AlphabetMismatch(
            "x and y use different alphabets".into(),
        ));
    }
    let size = x.alphabet().size();
    if size > 64 {
        let scheme = ScoringScheme::lcs(size)?;
        return Ok(dp_integer(x.indices(), y.indices(), &scheme) as usize);
    }
    Ok(lcs_bitparallel(x.indices(), y.indices(), size))
}

fn lcs_bitparallel(x: &[u8], y: &[u8], alphabet_size: usize) -> usize {
    let m = x.len();
    if m == 0 {
        return 0;
    }
    let words = m.div_ceil(64);
    let mut masks = vec![0u64; alphabet_size * words];
    for (i, &c) in x.iter().enumerate() {
        masks[c as usize * words + (i >> 6)] |= 1u64 << (i & 63);
    }
    let mut v = vec![!0u64; words];
    for &c in y {
        let mask = &masks[c as usize * words..(c as usize + 1) * words];
        let mut carry = 0u64;
        for w in 0..words {
            let keep = v[w] & !mask[w];
            let add = v[w] & mask[w];
            let (s1, c1) = v[w].overflowing_add(add);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = u64::from(c1 | c2);
            v[w] = s2 | keep;
        }
    }
    // Force the garbage bits above position m to one so they count no zeros.
    if m & 63 != 0 {
        v[words - 1] |= !0u64 << (m & 63);
    }
    v.iter().map(|w| w.count_zeros() as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::seq::Alphabet;
    use std::sync::Arc;

    fn seq(al: &Arc<Alphabet>, s: &str) -> Sequence {
        al.parse(s).unwrap()
    }

    fn is_subsequence(needle: &str, hay: &str) -> bool {
        let mut it = hay.chars();
        needle.chars().all(|c| it.by_ref().any(|h| h == c))
    }

    #[test]
    fn fixed_binary_pair_scores_eleven() {
        let al = Alphabet::binary();
        let x = seq(&al, "100101100001101");
        let y = seq(&al, "111000010101110");
        // witness common subsequence of length 11
        let witness = "11100001101";
        assert!(is_subsequence(witness, "100101100001101"));
        assert!(is_subsequence(witness, "111000010101110"));
        assert_eq!(lcs_length(&x, &y).unwrap(), 11);
        let scheme = ScoringScheme::lcs(2).unwrap();
        assert_eq!(optimal_score(&x, &y, &scheme).unwrap().value, 11.0);
    }

    #[test]
    fn identical_strings_score_n_under_lcs() {
        let al = Alphabet::from_chars("abc").unwrap();
        let scheme = ScoringScheme::lcs(3).unwrap();
        let x = seq(&al, "abccba");
        assert_eq!(optimal_score(&x, &x, &scheme).unwrap().value, 6.0);
    }

    #[test]
    fn empty_sequences_score_zero() {
        let al = Alphabet::binary();
        let x = seq(&al, "");
        let scheme = ScoringScheme::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.5).unwrap();
        assert_eq!(brute_force_score(&x, &x, &scheme).unwrap().value, 0.0);
        assert_eq!(optimal_score(&x, &x, &scheme).unwrap().value, 0.0);
    }

    #[test]
    fn brute_force_tiny_cases() {
        let al = Alphabet::binary();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let x = seq(&al, "01");
        let y = seq(&al, "10");
        assert_eq!(brute_force_score(&x, &y, &scheme).unwrap().value, 1.0);
        assert_eq!(optimal_score(&x, &y, &scheme).unwrap().value, 1.0);
    }

    #[test]
    fn brute_force_refuses_large_n() {
        let al = Alphabet::binary();
        let x = seq(&al, "0101010101010");
        let scheme = ScoringScheme::lcs(2).unwrap();
        assert!(matches!(
            brute_force_score(&x, &x, &scheme),
            Err(Error::Guard(_))
        ));
    }

    fn test_schemes() -> Vec<ScoringScheme> {
        vec![
            ScoringScheme::lcs(2).unwrap(),
            ScoringScheme::new(vec![vec![2.0, 1.0], vec![0.5, 3.0]], -1.0).unwrap(),
            ScoringScheme::new(vec![vec![2.0, 1.0], vec![0.5, 3.0]], 0.5).unwrap(),
        ]
    }

    #[test]
    fn dp_matches_brute_force_exhaustively_n4() {
        let al = Alphabet::binary();
        let schemes = test_schemes();
        for xs in 0..16u8 {
            for ys in 0..16u8 {
                let x = Sequence::from_indices(
                    Arc::clone(&al),
                    (0..4).map(|i| xs >> i & 1).collect(),
                )
                .unwrap();
                let y = Sequence::from_indices(
                    Arc::clone(&al),
                    (0..4).map(|i| ys >> i & 1).collect(),
                )
                .unwrap();
                for scheme in &schemes {
                    let fast = optimal_score(&x, &y, scheme).unwrap().value;
                    let slow = brute_force_score(&x, &y, scheme).unwrap().value;
                    assert_eq!(fast, slow, "x={x} y={y} delta={}", scheme.delta());
                }
            }
        }
    }

    #[test]
    fn dp_matches_brute_force_random_ternary() {
        let al = Alphabet::from_chars("abc").unwrap();
        let scheme = ScoringScheme::new(
            vec![
                vec![2.0, 0.5, 0.0],
                vec![0.5, 1.5, 1.0],
                vec![0.0, 1.0, 3.0],
            ],
            -0.5,
        )
        .unwrap();
        let mut rng = RandomStream::root(11);
        for _ in 0..300 {
            let n = rng.below(11);
            let x = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|_| rng.below(3) as u8).collect(),
            )
            .unwrap();
            let y = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|_| rng.below(3) as u8).collect(),
            )
            .unwrap();
            let fast = optimal_score(&x, &y, &scheme).unwrap().value;
            let slow = brute_force_score(&x, &y, &scheme).unwrap().value;
            assert!((fast - slow).abs() < 1e-9, "n={n} x={x} y={y}");
        }
    }

    #[test]
    fn bitparallel_matches_dp_on_random_pairs() {
        let al = Alphabet::binary();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let mut rng = RandomStream::root(5);
        for _ in 0..100 {
            let n = 256;
            let x = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|_| rng.below(2) as u8).collect(),
            )
            .unwrap();
            let y = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|_| rng.below(2) as u8).collect(),
            )
            .unwrap();
            let bp = lcs_length(&x, &y).unwrap();
            let dp = dp_integer(x.indices(), y.indices(), &scheme);
            assert_eq!(bp as i64, dp);
        }
    }

    #[test]
    fn complement_pairs_lose_exactly_one() {
        let al = Alphabet::binary();
        for n in [2usize, 4, 6, 8] {
            let x = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|i| (i % 2) as u8).collect(),
            )
            .unwrap();
            let y = Sequence::from_indices(
                Arc::clone(&al),
                (0..n).map(|i| ((i + 1) % 2) as u8).collect(),
            )
            .unwrap();
            assert_eq!(lcs_length(&x, &y).unwrap(), n - 1);
        }
    }

    #[test]
    fn single_edit_changes_score_by_at_most_a_max() {
        let al = Alphabet::from_chars("abc").unwrap();
        let scheme = ScoringScheme::new(
            vec![
                vec![2.0, 1.0, 0.0],
                vec![1.0, 3.0, 0.5],
                vec![0.0, 0.5, 1.0],
            ],
            -1.0,
        )
        .unwrap();
        let mut rng = RandomStream::root(17);
        for _ in 0..200 {
            let n = 1 + rng.below(12);
            let data: Vec<u8> = (0..2 * n).map(|_| rng.below(3) as u8).collect();
            let x =
                Sequence::from_indices(Arc::clone(&al), data[..n].to_vec()).unwrap();
            let y =
                Sequence::from_indices(Arc::clone(&al), data[n..].to_vec()).unwrap();
            let base = optimal_score(&x, &y, &scheme).unwrap().value;
            let pos = rng.below(n);
            let sym = rng.below(3) as u8;
            let edited = x.with_symbol(pos, sym);
            let new = optimal_score(&edited, &y, &scheme).unwrap().value;
            assert!(
                new >= base - scheme.a_max() - 1e-9,
                "edit dropped the score by more than A"
            );
        }
    }

    #[test]
    fn appending_a_common_symbol_never_hurts() {
        let al = Alphabet::binary();
        let mut rng = RandomStream::root(23);
        for _ in 0..200 {
            let n = rng.below(40);
            let xd: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
            let yd: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
            let sym = rng.below(2) as u8;
            let x = Sequence::from_indices(Arc::clone(&al), xd.clone()).unwrap();
            let y = Sequence::from_indices(Arc::clone(&al), yd.clone()).unwrap();
            let base = lcs_length(&x, &y).unwrap();
            let mut xe = xd;
            let mut ye = yd;
            xe.push(sym);
            ye.push(sym);
            let x2 = Sequence::from_indices(Arc::clone(&al), xe).unwrap();
            let y2 = Sequence::from_indices(Arc::clone(&al), ye).unwrap();
            assert!(lcs_length(&x2, &y2).unwrap() >= base);
        }
    }

    #[test]
    fn lcs_is_superadditive_at_split_points() {
        let al = Alphabet::binary();
        let mut rng = RandomStream::root(29);
        for _ in 0..200 {
            let n = 2 + rng.below(60);
            let xd: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
            let yd: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
            let m = 1 + rng.below(n - 1);
            let whole = {
                let x = Sequence::from_indices(Arc::clone(&al), xd.clone()).unwrap();
                let y = Sequence::from_indices(Arc::clone(&al), yd.clone()).unwrap();
                lcs_length(&x, &y).unwrap()
            };
            let left = {
                let x = Sequence::from_indices(Arc::clone(&al), xd[..m].to_vec()).unwrap();
                let y = Sequence::from_indices(Arc::clone(&al), yd[..m].to_vec()).unwrap();
                lcs_length(&x, &y).unwrap()
            };
            let right = {
                let x = Sequence::from_indices(Arc::clone(&al), xd[m..].to_vec()).unwrap();
                let y = Sequence::from_indices(Arc::clone(&al), yd[m..].to_vec()).unwrap();
                lcs_length(&x, &y).unwrap()
            };
            assert!(whole >= left + right);
        }
    }
}
