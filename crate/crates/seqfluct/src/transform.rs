//! The two random transformations and their exact outcome enumerations.
//!
//! A letter swap turns one uniformly chosen occurrence of `a` (over both
//! strings) into `b`; the block transformation picks one block of length
//! `l-1` and one of length `l+1` in `x`, both uniformly and independently,
//! and turns both into blocks of length `l`, leaving `y` untouched. Both
//! shift `u` by a fixed `k0` (1 resp. 4) and fix `v`. The outcome set gives
//! the transformation's exact conditional law, so the inner expectation
//! `E[L(Z~) - L(Z) | Z]` never needs sampling.

use serde::Serialize;

use crate::align::pair_score;
use crate::error::{Error, Result};
use crate::models::block_stats;
use crate::rng::RandomStream;
use crate::scoring::ScoringScheme;
use crate::seq::{Sequence, SequencePair};

/// A random transformation on sequence pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Transform {
    LetterSwap { a: usize, b: usize },
    BlockTransform { l: usize },
}

/// The exact law of `Z~` given `Z = z`: outcomes with positive probabilities
/// summing to one, duplicates merged.
#[derive(Debug, Clone)]
pub struct OutcomeSet {
    pub items: Vec<(SequencePair, f64)>,
}

impl OutcomeSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl Transform {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Transform::LetterSwap { a, b } if a == b => Err(Error::Validation(
                "letter swap needs two distinct letters".into(),
            )),
            Transform::BlockTransform { l } if l < 2 => Err(Error::Validation(format!(
                "block transformation needs l >= 2, got {l}"
            ))),
            _ => Ok(()),
        }
    }

    /// The shift of `u` produced by one application.
    pub fn k0(&self) -> i64 {
        match self {
            Transform::LetterSwap { .. } => 1,
            Transform::BlockTransform { .. } => 4,
        }
    }

    /// Hard lower bound on the score gain of one application.
    pub fn gain_lower_bound(&self, scheme: &ScoringScheme) -> f64 {
        match self {
            Transform::LetterSwap { .. } => -scheme.a_max(),
            Transform::BlockTransform { .. } => -1.0,
        }
    }

    /// Apply the transformation once, drawing its randomness from `rng`.
    pub fn apply(&self, z: &SequencePair, rng: &mut RandomStream) -> Result<SequencePair> {
        self.validate()?;
        match *self {
            Transform::LetterSwap { a, b } => {
                let slots = letter_slots(z, a as u8);
                if slots.is_empty() {
                    return Err(Error::Inapplicable(format!(
                        "no occurrence of letter {a} in either string"
                    )));
                }
                let (in_y, pos) = slots[rng.below(slots.len())];
                Ok(swap_at(z, in_y, pos, b as u8))
            }
            Transform::BlockTransform { l } => {
                let runs = run_profile(&z.x);
                let (short, long) = pickable_blocks(&z.x, &runs, l)?;
                let i = short[rng.below(short.len())];
                let j = long[rng.below(long.len())];
                Ok(SequencePair {
                    x: rebuild_with(&z.x, &runs, &[(i, l), (j, l)]),
                    y: z.y.clone(),
                })
            }
        }
    }

    /// Enumerate the full outcome law of one application.
    pub fn outcomes(&self, z: &SequencePair) -> Result<OutcomeSet> {
        self.validate()?;
        let raw: Vec<(SequencePair, f64)> = match *self {
            Transform::LetterSwap { a, b } => {
                let slots = letter_slots(z, a as u8);
                if slots.is_empty() {
                    return Err(Error::Inapplicable(format!(
                        "no occurrence of letter {a} in either string"
                    )));
                }
                let p = 1.0 / slots.len() as f64;
                slots
                    .iter()
                    .map(|&(in_y, pos)| (swap_at(z, in_y, pos, b as u8), p))
                    .collect()
            }
            Transform::BlockTransform { l } => {
                let runs = run_profile(&z.x);
                let (short, long) = pickable_blocks(&z.x, &runs, l)?;
                let p = 1.0 / (short.len() * long.len()) as f64;
                let mut items = Vec::with_capacity(short.len() * long.len());
                for &i in &short {
                    for &j in &long {
                        items.push((
                            SequencePair {
                                x: rebuild_with(&z.x, &runs, &[(i, l), (j, l)]),
                                y: z.y.clone(),
                            },
                            p,
                        ));
                    }
                }
                items
            }
        };
        // merge identical outcomes so the set is a true pmf
        let mut merged: Vec<(SequencePair, f64)> = Vec::with_capacity(raw.len());
        for (pair, p) in raw {
            match merged.iter_mut().find(|(q, _)| *q == pair) {
                Some((_, acc)) => *acc += p,
                None => merged.push((pair, p)),
            }
        }
        Ok(OutcomeSet { items: merged })
    }

    /// All `z` whose outcome set contains `z~`.
    pub fn preimages(&self, z_tilde: &SequencePair) -> Vec<SequencePair> {
        match *self {
            Transform::LetterSwap { a, b } => letter_slots(z_tilde, b as u8)
                .into_iter()
                .map(|(in_y, pos)| swap_at(z_tilde, in_y, pos, a as u8))
                .collect(),
            Transform::BlockTransform { l } => {
                let runs = run_profile(&z_tilde.x);
                if runs.len() < 2 {
                    return Vec::new();
                }
                // the trailing run is not a block
                let central: Vec<usize> = (0..runs.len() - 1)
                    .filter(|&i| runs[i].1 == l)
                    .collect();
                let mut out = Vec::new();
                for &i in &central {
                    for &j in &central {
                        if i == j {
                            continue;
                        }
                        out.push(SequencePair {
                            x: rebuild_with(&z_tilde.x, &runs, &[(i, l - 1), (j, l + 1)]),
                            y: z_tilde.y.clone(),
                        });
                    }
                }
                out
            }
        }
    }

    /// Exact inner conditional expectation `E[L(Z~) - L(Z) | Z = z]`.
    pub fn expected_gain(
        &self,
        z: &SequencePair,
        scheme: &ScoringScheme,
    ) -> Result<f64> {
        let base = pair_score(z, scheme)?;
        let outcomes = self.outcomes(z)?;
        let mut gain = 0.0;
        for (pair, p) in &outcomes.items {
            gain += p * (pair_score(pair, scheme)? - base);
        }
        Ok(gain)
    }

    /// Minimum score gain over the outcome set, for the hard `A2` bound.
    pub fn min_gain(&self, z: &SequencePair, scheme: &ScoringScheme) -> Result<f64> {
        let base = pair_score(z, scheme)?;
        let outcomes = self.outcomes(z)?;
        let mut min = f64::INFINITY;
        for (pair, _) in &outcomes.items {
            min = min.min(pair_score(pair, scheme)? - base);
        }
        Ok(min)
    }
}

/// Positions of a letter across both strings as `(in_y, index)` slots.
fn letter_slots(z: &SequencePair, letter: u8) -> Vec<(bool, usize)> {
    let mut slots = Vec::new();
    for (i, &c) in z.x.indices().iter().enumerate() {
        if c == letter {
            slots.push((false, i));
        }
    }
    for (i, &c) in z.y.indices().iter().enumerate() {
        if c == letter {
            slots.push((true, i));
        }
    }
    slots
}

fn swap_at(z: &SequencePair, in_y: bool, pos: usize, to: u8) -> SequencePair {
    if in_y {
        SequencePair {
            x: z.x.clone(),
            y: z.y.with_symbol(pos, to),
        }
    } else {
        SequencePair {
            x: z.x.with_symbol(pos, to),
            y: z.y.clone(),
        }
    }
}

/// Run-length profile `(color, length)` of a sequence.
fn run_profile(x: &Sequence) -> Vec<(u8, usize)> {
    let mut runs: Vec<(u8, usize)> = Vec::new();
    for &c in x.indices() {
        match runs.last_mut() {
            Some((color, len)) if *color == c => *len += 1,
            _ => runs.push((c, 1)),
        }
    }
    runs
}

/// Indices of interior `(l-1)`- and `(l+1)`-blocks; validates the sequence.
fn pickable_blocks(
    x: &Sequence,
    runs: &[(u8, usize)],
    l: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    block_stats(x, l)?;
    let interior = runs.len() - 1;
    let short: Vec<usize> = (0..interior).filter(|&i| runs[i].1 == l - 1).collect();
    let long: Vec<usize> = (0..interior).filter(|&i| runs[i].1 == l + 1).collect();
    if short.is_empty() || long.is_empty() {
        return Err(Error::Inapplicable(format!(
            "needs at least one block of length {} and one of length {}",
            l - 1,
            l + 1
        )));
    }
    Ok((short, long))
}

/// Rebuild a sequence from its run profile with some run lengths replaced.
fn rebuild_with(x: &Sequence, runs: &[(u8, usize)], edits: &[(usize, usize)]) -> Sequence {
    let mut lengths: Vec<usize> = runs.iter().map(|&(_, len)| len).collect();
    for &(i, len) in edits {
        lengths[i] = len;
    }
    let mut data = Vec::with_capacity(x.len());
    for (i, &(color, _)) in runs.iter().enumerate() {
        data.extend(std::iter::repeat(color).take(lengths[i]));
    }
    Sequence::from_indices(std::sync::Arc::clone(x.alphabet()), data)
        .expect("rebuilt indices are valid")
}
