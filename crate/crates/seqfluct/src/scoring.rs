//! Pairwise scoring schemes and the letter-pair drift condition.
//!
//! A scheme is a nonnegative pairwise score table `S` together with a gap
//! price `delta`. The gap price may be positive but never exceeds the largest
//! table entry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seq::SymbolDist;

/// A pairwise score table over symbol indices plus a per-gap price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoringScheme {
    size: usize,
    /// Row-major `size * size` table; entry `(a, b)` at `a * size + b`.
    table: Vec<f64>,
    delta: f64,
    a_max: f64,
}

impl ScoringScheme {
    /// Build a scheme from a square table and a gap price.
    ///
    /// Rejects negative or non-finite entries and any `delta` above the
    /// largest table entry.
    pub fn new(table: Vec<Vec<f64>>, delta: f64) -> Result<Self> {
        let size = table.len();
        if size < 2 {
            return Err(Error::Validation(
                "score table needs at least 2 symbols".into(),
            ));
        }
        let mut flat = Vec::with_capacity(size * size);
        for row in &table {
            if row.len() != size {
                return Err(Error::Dimension(format!(
                    "score table is not square: row of length {} in a {}-symbol table",
                    row.len(),
                    size
                )));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!(
                        "score table entries must be finite and >= 0; got {v}"
                    )));
                }
                flat.push(v);
            }
        }
        let a_max = flat.iter().cloned().fold(0.0_f64, f64::max);
        if !delta.is_finite() || delta > a_max {
            return Err(Error::Validation(format!(
                "gap price delta = {delta} must be finite and <= max table entry {a_max}"
            )));
        }
        Ok(ScoringScheme {
            size,
            table: flat,
            delta,
            a_max,
        })
    }

    /// The LCS scheme on `size` symbols: identity table, zero gap price.
    pub fn lcs(size: usize) -> Result<Self> {
        let table = (0..size)
            .map(|a| (0..size).map(|b| f64::from(a == b)).collect())
            .collect();
        ScoringScheme::new(table, 0.0)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn score(&self, a: u8, b: u8) -> f64 {
        self.table[a as usize * self.size + b as usize]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest table entry `A`; a single-letter edit changes the optimal
    /// score by at most this much.
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// True iff the scheme is bit-for-bit the LCS scheme of its size.
    pub fn is_lcs(&self) -> bool {
        if self.delta != 0.0 {
            return false;
        }
        self.table
            .iter()
            .enumerate()
            .all(|(i, &v)| v == f64::from(i / self.size == i % self.size))
    }

    /// True iff every table entry and the gap price are integers, so the
    /// alignment DP can run exactly over `i64`.
    pub fn is_integral(&self) -> bool {
        self.delta.fract() == 0.0 && self.table.iter().all(|v| v.fract() == 0.0)
    }
}

/// Letter-pair drift condition: `sum_c P(c) (S(b, c) - S(a, c)) > 0`.
///
/// Evaluated exactly over the alphabet with a strict inequality; a sum of
/// exactly zero is reported as `false`. The summand is antisymmetric in
/// `(a, b)`, so at most one orientation can hold.
pub fn check_mimi(scheme: &ScoringScheme, dist: &SymbolDist, a: usize, b: usize) -> Result<bool> {
    if dist.len() != scheme.size() {
        return Err(Error::Dimension(format!(
            "distribution over {} symbols does not match a {}-symbol score table",
            dist.len(),
            scheme.size()
        )));
    }
    if a == b {
        return Err(Error::Validation("letters a and b must differ".into()));
    }
    if a >= scheme.size() || b >= scheme.size() {
        return Err(Error::Validation("letter index out of range".into()));
    }
    Ok(mimi_sum(scheme, dist, a, b) > 0.0)
}

/// The drift sum itself, for reporting.
pub fn mimi_sum(scheme: &ScoringScheme, dist: &SymbolDist, a: usize, b: usize) -> f64 {
    (0..scheme.size())
        .map(|c| dist.prob(c) * (scheme.score(b as u8, c as u8) - scheme.score(a as u8, c as u8)))
        .sum()
}
