//! The 3-multinomial block model.
//!
//! A binary sequence is built by concatenating alternating-colour blocks whose
//! lengths are i.i.d. on `{l-1, l, l+1}` with probabilities `(q1, q2, q3)`,
//! the first colour being a fair coin; the infinite concatenation is truncated
//! to `n` symbols. Every run except the trailing one is a block; the trailing
//! run has length `r` in `{1, ..., l+1}` and is never a block, even when a
//! block boundary lands exactly on `n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{multinomial_coeff, DIRECT_PMF_MAX};
use crate::rng::RandomStream;
use crate::seq::{Alphabet, Sequence, PROB_SUM_TOL};

/// Parameters `(l, q1, q2, q3)` with the derived mean block length
/// `mu = l + q3 - q1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockModelParams {
    l: usize,
    q: [f64; 3],
}

impl BlockModelParams {
    pub fn new(l: usize, q1: f64, q2: f64, q3: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::Validation(format!(
                "central block length l must be >= 2, got {l}"
            )));
        }
        for (name, q) in [("q1", q1), ("q2", q2), ("q3", q3)] {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Validation(format!(
                    "{name} must lie in (0, 1), got {q}"
                )));
            }
        }
        if (q1 + q2 + q3 - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Validation(format!(
                "q1+q2+q3 must sum to 1 within {PROB_SUM_TOL:e}; got {}",
                q1 + q2 + q3
            )));
        }
        Ok(BlockModelParams { l, q: [q1, q2, q3] })
    }

    /// Equal block-length probabilities.
    pub fn equiprobable(l: usize) -> Result<Self> {
        BlockModelParams::new(l, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn q(&self) -> [f64; 3] {
        self.q
    }

    /// Mean block length `mu = l + q3 - q1`.
    pub fn mu(&self) -> f64 {
        self.l as f64 + self.q[2] - self.q[0]
    }

    /// Tail `p(r) = P(W >= r)` of the block-length law, `r` in `1..=l+1`.
    pub fn run_tail(&self, r: usize) -> f64 {
        if r <= self.l - 1 {
            1.0
        } else if r == self.l {
            self.q[1] + self.q[2]
        } else {
            self.q[2]
        }
    }

    fn draw_block_len(&self, rng: &mut RandomStream) -> usize {
        let t = rng.uniform();
        if t < self.q[0] {
            self.l - 1
        } else if t < self.q[0] + self.q[1] {
            self.l
        } else {
            self.l + 1
        }
    }
}

/// Interior block counts by length `(l-1, l, l+1)` plus the trailing-run
/// length. Satisfies `(l-1) b1 + l b2 + (l+1) b3 + r = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockStats {
    pub b1: u64,
    pub b2: u64,
    pub b3: u64,
    pub r: usize,
}

/// Block counts and trailing run of a sequence; every interior run must have
/// length in `{l-1, l, l+1}` and the trailing run at most `l+1`.
pub fn block_stats(x: &Sequence, l: usize) -> Result<BlockStats> {
    if x.is_empty() {
        return Err(Error::MalformedSequence(
            "an empty sequence has no trailing run".into(),
        ));
    }
    let data = x.indices();
    let mut runs = Vec::new();
    let mut cur = 1usize;
    for i in 1..data.len() {
        if data[i] == data[i - 1] {
            cur += 1;
        } else {
            runs.push(cur);
            cur = 1;
        }
    }
    let r = cur;
    if r > l + 1 {
        return Err(Error::MalformedSequence(format!(
            "trailing run of length {r} exceeds l+1 = {}",
            l + 1
        )));
    }
    let (mut b1, mut b2, mut b3) = (0u64, 0u64, 0u64);
    for &w in &runs {
        if w == l - 1 {
            b1 += 1;
        } else if w == l {
            b2 += 1;
        } else if w == l + 1 {
            b3 += 1;
        } else {
            return Err(Error::MalformedSequence(format!(
                "interior block of length {w} outside {{{}, {}, {}}}",
                l - 1,
                l,
                l + 1
            )));
        }
    }
    Ok(BlockStats { b1, b2, b3, r })
}

/// Build the first `n` symbols of the block concatenation with first colour
/// `theta` and the given block lengths.
pub fn build_from_blocks(
    theta: u8,
    lengths: impl IntoIterator<Item = usize>,
    n: usize,
) -> Sequence {
    let mut data = Vec::with_capacity(n);
    let mut color = theta;
    'outer: for w in lengths {
        for _ in 0..w {
            data.push(color);
            if data.len() == n {
                break 'outer;
            }
        }
        color ^= 1;
    }
    assert!(data.len() == n, "not enough block lengths to reach n");
    Sequence::from_indices(Alphabet::binary(), data).expect("binary indices")
}

/// Sample one block-model sequence of length `n >= 1`.
pub fn sample_block(n: usize, params: &BlockModelParams, rng: &mut RandomStream) -> Sequence {
    let theta = u8::from(rng.coin());
    let mut data = Vec::with_capacity(n);
    let mut color = theta;
    while data.len() < n {
        let w = params.draw_block_len(rng);
        for _ in 0..w {
            data.push(color);
            if data.len() == n {
                break;
            }
        }
        color ^= 1;
    }
    Sequence::from_indices(Alphabet::binary(), data).expect("binary indices")
}

/// `(t, u, r)` from block counts: `t = b1+b2+b3`, `u = b2-b1-b3`.
pub fn uv_from_blocks(stats: &BlockStats, n: usize, l: usize) -> Result<(i64, i64, i64)> {
    let weighted =
        (l as u64 - 1) * stats.b1 + l as u64 * stats.b2 + (l as u64 + 1) * stats.b3
            + stats.r as u64;
    if weighted != n as u64 {
        return Err(Error::Validation(format!(
            "block stats cover {weighted} symbols, expected n = {n}"
        )));
    }
    let t = (stats.b1 + stats.b2 + stats.b3) as i64;
    let u = stats.b2 as i64 - stats.b1 as i64 - stats.b3 as i64;
    Ok((t, u, stats.r as i64))
}

/// Invert `(t, u, r)` to block counts via the linear system; errors when the
/// solution is not a triple of nonnegative integers.
pub fn tur_to_blocks(t: i64, u: i64, r: i64, n: usize, l: usize) -> Result<BlockStats> {
    let li = l as i64;
    let ni = n as i64;
    let infeasible = |why: String| Error::InfeasibleTriple(why);
    if !(1..=li + 1).contains(&r) {
        return Err(infeasible(format!("r = {r} outside 1..={}", li + 1)));
    }
    if t < 0 {
        return Err(infeasible(format!("t = {t} negative")));
    }
    if (t + u) % 2 != 0 {
        return Err(infeasible(format!("t + u = {} is odd", t + u)));
    }
    let b2 = (t + u) / 2;
    let num_b1 = (2 * li + 1) * t - u - 2 * (ni - r);
    let num_b3 = -(2 * li - 1) * t - u + 2 * (ni - r);
    if num_b1 % 4 != 0 || num_b3 % 4 != 0 {
        return Err(infeasible(format!(
            "(t, u, r) = ({t}, {u}, {r}) has no integer block solution"
        )));
    }
    let b1 = num_b1 / 4;
    let b3 = num_b3 / 4;
    if b1 < 0 || b2 < 0 || b3 < 0 {
        return Err(infeasible(format!(
            "block counts ({b1}, {b2}, {b3}) not all nonnegative"
        )));
    }
    Ok(BlockStats {
        b1: b1 as u64,
        b2: b2 as u64,
        b3: b3 as u64,
        r: r as usize,
    })
}

/// Probability of one block-model sequence: `1/2 q1^b1 q2^b2 q3^b3 p(r)`.
pub fn block_seq_prob(x: &Sequence, params: &BlockModelParams) -> Result<f64> {
    let stats = block_stats(x, params.l())?;
    Ok(stats_prob(&stats, params, x.len()))
}

fn stats_prob(stats: &BlockStats, params: &BlockModelParams, n: usize) -> f64 {
    let [q1, q2, q3] = params.q();
    let tail = params.run_tail(stats.r);
    if n as u64 <= DIRECT_PMF_MAX {
        0.5 * q1.powi(stats.b1 as i32) * q2.powi(stats.b2 as i32) * q3.powi(stats.b3 as i32)
            * tail
    } else {
        (f64::ln(0.5)
            + stats.b1 as f64 * q1.ln()
            + stats.b2 as f64 * q2.ln()
            + stats.b3 as f64 * q3.ln()
            + tail.ln())
        .exp()
    }
}

/// Joint pmf of `(T, U, R)`:
/// `multinomial(t; b1, b2, b3) q1^b1 q2^b2 q3^b3 p(r)`, and zero off the
/// support.
pub fn tur_pmf(t: i64, u: i64, r: i64, params: &BlockModelParams, n: usize) -> f64 {
    let stats = match tur_to_blocks(t, u, r, n, params.l()) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    let [q1, q2, q3] = params.q();
    let tail = params.run_tail(stats.r);
    if t as u64 <= DIRECT_PMF_MAX && n as u64 <= 4 * DIRECT_PMF_MAX {
        multinomial_coeff(&[stats.b1, stats.b2, stats.b3])
            * q1.powi(stats.b1 as i32)
            * q2.powi(stats.b2 as i32)
            * q3.powi(stats.b3 as i32)
            * tail
    } else {
        (crate::num::ln_multinomial_coeff(&[stats.b1, stats.b2, stats.b3])
            + stats.b1 as f64 * q1.ln()
            + stats.b2 as f64 * q2.ln()
            + stats.b3 as f64 * q3.ln()
            + tail.ln())
        .exp()
    }
}

/// All `u` with `P(U = u, V = (t, r)) > 0`, in increasing order. The fiber is
/// an arithmetic progression of span 4.
pub fn fiber_block(t: i64, r: i64, n: usize, l: usize) -> Vec<i64> {
    let li = l as i64;
    let ni = n as i64;
    if !(1..=li + 1).contains(&r) || t < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    // b2 parity is forced by n - r - (l-1) t; b3 and b1 follow linearly.
    let residue = (ni - r - (li - 1) * t).rem_euclid(2);
    let mut b2 = residue;
    while b2 <= t {
        let twice_b3 = ni - r - (li - 1) * t - b2;
        if twice_b3 >= 0 && twice_b3 % 2 == 0 {
            let b3 = twice_b3 / 2;
            let b1 = t - b2 - b3;
            if b1 >= 0 && b3 >= 0 {
                out.push(2 * b2 - t);
            }
        }
        b2 += 2;
    }
    out
}

/// Enumerate every block-model sequence of length `n` with its probability.
pub fn enumerate_block_x(params: &BlockModelParams, n: usize) -> Vec<(Sequence, f64)> {
    let mut out = Vec::new();
    let mut runs: Vec<usize> = Vec::new();
    for theta in 0..2u8 {
        dfs(params, theta, n, &mut runs, &mut out);
    }
    debug_assert!(runs.is_empty());
    out
}

fn dfs(
    params: &BlockModelParams,
    theta: u8,
    remaining: usize,
    runs: &mut Vec<usize>,
    out: &mut Vec<(Sequence, f64)>,
) {
    let l = params.l();
    if (1..=l + 1).contains(&remaining) {
        let n = runs.iter().sum::<usize>() + remaining;
        let mut all = runs.clone();
        all.push(remaining);
        let seq = build_from_blocks(theta, all, n);
        let stats = block_stats(&seq, l).expect("constructed sequence is well formed");
        out.push((seq, stats_prob(&stats, params, n)));
    }
    for w in [l - 1, l, l + 1] {
        if w < remaining {
            runs.push(w);
            dfs(params, theta, remaining - w, runs, out);
            runs.pop();
        }
    }
}

/// Number of block-model sequences of length `n`.
pub fn count_block_x(params: &BlockModelParams, n: usize) -> u128 {
    let l = params.l();
    let mut memo = vec![0u128; n + 1];
    for m in 1..=n {
        if (1..=l + 1).contains(&m) {
            memo[m] += 1;
        }
        for w in [l - 1, l, l + 1] {
            if w < m {
                memo[m] += memo[m - w];
            }
        }
    }
    2 * memo[n]
}
