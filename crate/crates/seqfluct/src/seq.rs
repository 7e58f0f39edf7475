//! Alphabets, sequences, and symbol distributions.
//!
//! Symbols are stored as dense small-integer indices so score-table lookups in
//! the alignment inner loop are plain array reads; the [`Alphabet`] owns the
//! printable one-character names. All types are immutable after construction
//! and safe to share across workers.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for "probabilities sum to one" checks.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Positivity floor for symbol probabilities; near-degenerate distributions
/// are rejected.
pub const MIN_SYMBOL_PROB: f64 = 1e-9;

/// An ordered finite alphabet of at least two distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Arc<Self>> {
        if symbols.len() < 2 {
            return Err(Error::Validation(format!(
                "alphabet needs at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        if symbols.len() > 256 {
            return Err(Error::Validation(format!(
                "alphabet too large ({} symbols, max 256)",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Validation(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Arc::new(Alphabet { symbols }))
    }

    /// Alphabet from the characters of a string, e.g. `"01"` or `"ab*"`.
    pub fn from_chars(chars: &str) -> Result<Arc<Self>> {
        Alphabet::new(chars.chars().collect())
    }

    /// The binary alphabet `{0, 1}`.
    pub fn binary() -> Arc<Self> {
        Alphabet::new(vec!['0', '1']).expect("binary alphabet is valid")
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, index: usize) -> char {
        self.symbols[index]
    }

    pub fn index_of(&self, symbol: char) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }

    /// Parse a text sequence, one character per symbol.
    pub fn parse(self: &Arc<Self>, text: &str) -> Result<Sequence> {
        let mut data = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match self.index_of(ch) {
                Some(i) => data.push(i as u8),
                None => {
                    return Err(Error::Validation(format!(
                        "symbol {ch:?} is not in the alphabet"
                    )))
                }
            }
        }
        Ok(Sequence {
            alphabet: Arc::clone(self),
            data,
        })
    }
}

/// A finite string of symbol indices over a shared [`Alphabet`].
#[derive(Debug, Clone, Serialize)]
pub struct Sequence {
    alphabet: Arc<Alphabet>,
    data: Vec<u8>,
}

impl Sequence {
    pub fn from_indices(alphabet: Arc<Alphabet>, data: Vec<u8>) -> Result<Self> {
        let size = alphabet.size();
        if let Some(&bad) = data.iter().find(|&&i| (i as usize) >= size) {
            return Err(Error::Validation(format!(
                "symbol index {bad} out of range for alphabet of size {size}"
            )));
        }
        Ok(Sequence { alphabet, data })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.data
    }

    /// Copy with position `pos` replaced by symbol index `sym`.
    pub fn with_symbol(&self, pos: usize, sym: u8) -> Sequence {
        let mut data = self.data.clone();
        data[pos] = sym;
        Sequence {
            alphabet: Arc::clone(&self.alphabet),
            data,
        }
    }

    /// Count occurrences of a symbol index.
    pub fn count(&self, sym: u8) -> usize {
        self.data.iter().filter(|&&c| c == sym).count()
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data && self.alphabet == other.alphabet
    }
}
impl Eq for Sequence {}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &i in &self.data {
            write!(f, "{}", self.alphabet.symbol(i as usize))?;
        }
        Ok(())
    }
}

/// A pair `Z = (X, Y)` of equal-length sequences over the same alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequencePair {
    pub x: Sequence,
    pub y: Sequence,
}

impl SequencePair {
    pub fn new(x: Sequence, y: Sequence) -> Result<Self> {
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
        Ok(SequencePair { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Occurrences of symbol `sym` across both strings.
    pub fn count(&self, sym: u8) -> usize {
        self.x.count(sym) + self.y.count(sym)
    }
}

impl fmt::Display for SequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A fully supported probability vector over the alphabet symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolDist {
    probs: Vec<f64>,
}

impl SymbolDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Validation(
                "distribution needs at least 2 symbols".into(),
            ));
        }
        if let Some(&p) = probs
            .iter()
            .find(|&&p| !(p >= MIN_SYMBOL_PROB) || p > 1.0 - MIN_SYMBOL_PROB)
        {
            return Err(Error::Validation(format!(
                "every probability must lie in [{MIN_SYMBOL_PROB:e}, 1 - {MIN_SYMBOL_PROB:e}]; got {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Validation(format!(
                "probabilities must sum to 1 within {PROB_SUM_TOL:e}; got {sum}"
            )));
        }
        Ok(SymbolDist { probs })
    }

    /// Uniform distribution on `k` symbols.
    pub fn uniform(k: usize) -> Result<Self> {
        SymbolDist::new(vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prob(&self, sym: usize) -> f64 {
        self.probs[sym]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inverse-cdf draw of one symbol index.
    pub fn draw(&self, rng: &mut crate::rng::RandomStream) -> u8 {
        let t = rng.uniform();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if t < acc {
                return i as u8;
            }
        }
        (self.probs.len() - 1) as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_too_small() {
        assert!(Alphabet::new(vec!['a']).is_err());
        assert!(Alphabet::new(vec!['a', 'a']).is_err());
        assert!(Alphabet::new(vec!['a', 'b']).is_ok());
    }

    #[test]
    fn parse_round_trips() {
        let al = Alphabet::binary();
        let s = al.parse("100101").unwrap();
        assert_eq!(s.to_string(), "100101");
        assert_eq!(s.indices(), &[1, 0, 0, 1, 0, 1]);
        assert!(al.parse("10x").is_err());
    }

    #[test]
    fn pair_requires_equal_length_and_alphabet() {
        let al = Alphabet::binary();
        let x = al.parse("01").unwrap();
        let y = al.parse("1").unwrap();
        assert!(matches!(
            SequencePair::new(x.clone(), y),
            Err(Error::LengthMismatch(_))
        ));
        let other = Alphabet::from_chars("ab").unwrap();
        let z = other.parse("ab").unwrap();
        assert!(matches!(
            SequencePair::new(x, z),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn dist_requires_positive_entries_summing_to_one() {
        assert!(SymbolDist::new(vec![0.5, 0.5]).is_ok());
        assert!(SymbolDist::new(vec![1.0 - 1e-12, 1e-12]).is_err());
        assert!(SymbolDist::new(vec![0.6, 0.3]).is_err());
        assert!(SymbolDist::new(vec![0.5, 0.4, 0.2]).is_err());
        assert!(SymbolDist::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn dist_draw_covers_support() {
        let d = SymbolDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        let mut rng = crate::rng::RandomStream::root(1);
        let mut seen = [false; 3];
        for _ in 0..200 {
            seen[d.draw(&mut rng) as usize] = true;
        }
        assert_eq!(seen, [true; 3]);
    }
}
