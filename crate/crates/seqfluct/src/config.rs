//! TOML configuration: scheme files, model specs, and full run configs.
//!
//! A scheme file uses the documented keys `alphabet`, `score_table`,
//! `gap_price`, and (optionally) `probs`:
//!
//! ```toml
//! alphabet = "ab*"
//! score_table = [[2.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]]
//! gap_price = -1.0
//! probs = [0.25, 0.25, 0.5]
//! ```
//!
//! A run config adds `seed`, `out`, `workers`, a `[model]` table, an optional
//! `[scheme]` table (inline or `path = "..."`), and an `[experiment]` table
//! for the `run` subcommand. Values given as CLI flags win over the config.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{BlockModelParams, Model};
use crate::scoring::ScoringScheme;
use crate::seq::{Alphabet, SymbolDist};

/// On-disk scheme description.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SchemeFile {
    /// One character per symbol, e.g. `"01"`.
    pub alphabet: String,
    pub score_table: Vec<Vec<f64>>,
    pub gap_price: f64,
    /// Optional symbol distribution over the same alphabet.
    pub probs: Option<Vec<f64>>,
}

impl SchemeFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn alphabet(&self) -> Result<Arc<Alphabet>> {
        Alphabet::from_chars(&self.alphabet)
    }

    pub fn scheme(&self) -> Result<ScoringScheme> {
        ScoringScheme::new(self.score_table.clone(), self.gap_price)
    }

    pub fn dist(&self) -> Result<Option<SymbolDist>> {
        self.probs.clone().map(SymbolDist::new).transpose()
    }
}

/// On-disk model description.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ModelConfig {
    /// `"iid"` or `"block"`.
    pub kind: String,
    // i.i.d. fields
    pub alphabet: Option<String>,
    pub probs: Option<Vec<f64>>,
    pub a: Option<char>,
    pub b: Option<char>,
    // block fields
    pub l: Option<usize>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub q3: Option<f64>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<Model> {
        match self.kind.as_str() {
            "iid" => {
                let chars = self.alphabet.clone().ok_or_else(|| {
                    Error::Config("model.alphabet is required for the iid model".into())
                })?;
                let alphabet = Alphabet::from_chars(&chars)?;
                let probs = self.probs.clone().ok_or_else(|| {
                    Error::Config("model.probs is required for the iid model".into())
                })?;
                let dist = SymbolDist::new(probs)?;
                let a_char = self.a.unwrap_or_else(|| alphabet.symbol(0));
                let b_char = self.b.unwrap_or_else(|| alphabet.symbol(1));
                let a = alphabet
                    .index_of(a_char)
                    .ok_or_else(|| Error::Config(format!("model.a: {a_char:?} not in alphabet")))?;
                let b = alphabet
                    .index_of(b_char)
                    .ok_or_else(|| Error::Config(format!("model.b: {b_char:?} not in alphabet")))?;
                Model::iid(alphabet, dist, a, b)
            }
            "block" => {
                let l = self
                    .l
                    .ok_or_else(|| Error::Config("model.l is required for the block model".into()))?;
                let (q1, q2, q3) = match (self.q1, self.q2, self.q3) {
                    (Some(q1), Some(q2), Some(q3)) => (q1, q2, q3),
                    (None, None, None) => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
                    _ => {
                        return Err(Error::Config(
                            "model.q1, q2, q3 must be given together".into(),
                        ))
                    }
                };
                Ok(Model::block(BlockModelParams::new(l, q1, q2, q3)?))
            }
            other => Err(Error::Config(format!(
                "model.kind must be \"iid\" or \"block\", got {other:?}"
            ))),
        }
    }
}

/// Scheme reference inside a run config: a separate file or inline.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SchemeRef {
    Path { path: String },
    Inline(SchemeFile),
}

impl SchemeRef {
    pub fn load(&self, base: &Path) -> Result<SchemeFile> {
        match self {
            SchemeRef::Path { path } => SchemeFile::load(&base.join(path)),
            SchemeRef::Inline(file) => Ok(file.clone()),
        }
    }
}

/// Parameters of the experiment a config file asks for; consumed by the
/// `run` subcommand.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub samples: Option<u64>,
    pub eps0: Option<f64>,
    pub c: Option<f64>,
    pub target: Option<f64>,
    pub check: Option<String>,
    pub kind: Option<String>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub seq: Option<String>,
    pub pairs: Option<u64>,
}

/// A full run configuration file.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct RunConfigFile {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub model: Option<ModelConfig>,
    pub scheme: Option<SchemeRef>,
    pub experiment: Option<ExperimentConfig>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
