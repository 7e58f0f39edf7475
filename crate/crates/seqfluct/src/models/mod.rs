//! The two sequence models and their driving statistics `(U, V)`.
//!
//! For the i.i.d. model over a general alphabet, `U` counts the designated
//! letter `b` and `V` counts `a` and `b` together, across both strings. For
//! the block model, `U = B_l - B_{l-1} - B_{l+1}` and `V = (T, R)`, all read
//! off the first component `X`. [`Model`] bundles sampling, closed-form pmfs,
//! fibers, and the typical-set windows so the oracle and the estimators can
//! stay model-agnostic.

pub mod block;
pub mod iid;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::binom_pmf;
use crate::rng::RandomStream;
use crate::seq::{Alphabet, Sequence, SequencePair, SymbolDist};
use crate::transform::Transform;

pub use block::{
    block_seq_prob, block_stats, build_from_blocks, count_block_x, enumerate_block_x,
    fiber_block, sample_block, tur_pmf, tur_to_blocks, uv_from_blocks, BlockModelParams,
    BlockStats,
};
pub use iid::{enumerate_iid_x, iid_uv, sample_iid};

/// The conditioning statistic `V`: a scalar for the i.i.d. model, the pair
/// `(T, R)` for the block model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VKey {
    Scalar(i64),
    TR { t: i64, r: i64 },
}

impl std::fmt::Display for VKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VKey::Scalar(v) => write!(f, "{v}"),
            VKey::TR { t, r } => write!(f, "({t},{r})"),
        }
    }
}

/// A joint `(u, v)` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct UvKey {
    pub u: i64,
    pub v: VKey,
}

impl UvKey {
    pub fn shifted(self, k0: i64) -> UvKey {
        UvKey {
            u: self.u + k0,
            v: self.v,
        }
    }
}

impl std::fmt::Display for UvKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(u={}, v={})", self.u, self.v)
    }
}

/// A sequence model together with everything the verifiers need from it.
#[derive(Debug, Clone, Serialize)]
pub enum Model {
    Iid {
        alphabet: Arc<Alphabet>,
        dist: SymbolDist,
        /// Letter turned into `b` by the random transformation.
        a: usize,
        /// Letter the transformation produces.
        b: usize,
    },
    Block { params: BlockModelParams },
}

impl Model {
    pub fn iid(alphabet: Arc<Alphabet>, dist: SymbolDist, a: usize, b: usize) -> Result<Self> {
        if dist.len() != alphabet.size() {
            return Err(Error::Dimension(format!(
                "distribution over {} symbols for an alphabet of size {}",
                dist.len(),
                alphabet.size()
            )));
        }
        if a == b || a >= alphabet.size() || b >= alphabet.size() {
            return Err(Error::Validation(
                "letters a and b must be distinct alphabet symbols".into(),
            ));
        }
        Ok(Model::Iid {
            alphabet,
            dist,
            a,
            b,
        })
    }

    pub fn block(params: BlockModelParams) -> Self {
        Model::Block { params }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Iid { .. } => "iid",
            Model::Block { .. } => "block",
        }
    }

    pub fn alphabet(&self) -> Arc<Alphabet> {
        match self {
            Model::Iid { alphabet, .. } => Arc::clone(alphabet),
            Model::Block { .. } => Alphabet::binary(),
        }
    }

    /// The transformation's shift `k0` of `U`.
    pub fn k0(&self) -> i64 {
        match self {
            Model::Iid { .. } => 1,
            Model::Block { .. } => 4,
        }
    }

    /// The random transformation naturally attached to the model.
    pub fn transform(&self) -> Transform {
        match self {
            Model::Iid { a, b, .. } => Transform::LetterSwap { a: *a, b: *b },
            Model::Block { params } => Transform::BlockTransform { l: params.l() },
        }
    }

    pub fn sample_x(&self, n: usize, rng: &mut RandomStream) -> Sequence {
        match self {
            Model::Iid {
                alphabet, dist, ..
            } => sample_iid(n, dist, alphabet, rng),
            Model::Block { params } => sample_block(n, params, rng),
        }
    }

    pub fn sample_pair(&self, n: usize, rng: &mut RandomStream) -> SequencePair {
        let x = self.sample_x(n, rng);
        let y = self.sample_x(n, rng);
        SequencePair::new(x, y).expect("sampled components are compatible")
    }

    /// Sample just the driving statistic, without materialising sequences
    /// where possible (the block statistics depend on `X` only).
    pub fn sample_uv(&self, n: usize, rng: &mut RandomStream) -> UvKey {
        match self {
            Model::Iid { dist, a, b, .. } => {
                let (mut u, mut v) = (0i64, 0i64);
                for _ in 0..2 * n {
                    let c = dist.draw(rng) as usize;
                    if c == *b {
                        u += 1;
                        v += 1;
                    } else if c == *a {
                        v += 1;
                    }
                }
                UvKey {
                    u,
                    v: VKey::Scalar(v),
                }
            }
            Model::Block { params } => {
                let x = sample_block(n, params, rng);
                let stats = block_stats(&x, params.l()).expect("sampled sequence is well formed");
                let (t, u, r) =
                    uv_from_blocks(&stats, n, params.l()).expect("sampled stats are consistent");
                UvKey {
                    u,
                    v: VKey::TR { t, r },
                }
            }
        }
    }

    /// The driving statistic `(u, v)` of a pair.
    pub fn uv_of(&self, z: &SequencePair) -> Result<UvKey> {
        match self {
            Model::Iid { a, b, .. } => {
                let (u, v) = iid_uv(z, *a, *b);
                Ok(UvKey {
                    u,
                    v: VKey::Scalar(v),
                })
            }
            Model::Block { params } => {
                let stats = block_stats(&z.x, params.l())?;
                let (t, u, r) = uv_from_blocks(&stats, z.n(), params.l())?;
                Ok(UvKey {
                    u,
                    v: VKey::TR { t, r },
                })
            }
        }
    }

    /// Probability of a single sequence under the model.
    pub fn seq_prob(&self, x: &Sequence) -> Result<f64> {
        match self {
            Model::Iid { dist, .. } => Ok(x
                .indices()
                .iter()
                .map(|&c| dist.prob(c as usize))
                .product()),
            Model::Block { params } => block_seq_prob(x, params),
        }
    }

    /// Closed-form joint pmf `P(U = u, V = v)` at sequence length `n`.
    pub fn uv_pmf(&self, n: usize, key: UvKey) -> f64 {
        match (self, key.v) {
            (Model::Iid { dist, a, b, .. }, VKey::Scalar(v)) => {
                let u = key.u;
                if u < 0 || v < u || v > 2 * n as i64 {
                    return 0.0;
                }
                let p = dist.prob(*a) + dist.prob(*b);
                let pb = dist.prob(*b) / p;
                binom_pmf(2 * n as u64, p, v as u64) * binom_pmf(v as u64, pb, u as u64)
            }
            (Model::Block { params }, VKey::TR { t, r }) => tur_pmf(t, key.u, r, params, n),
            _ => 0.0,
        }
    }

    /// The fiber `S_n(v)`: all `u` jointly feasible with `v`, sorted.
    pub fn fiber(&self, n: usize, v: VKey) -> Vec<i64> {
        match (self, v) {
            (Model::Iid { alphabet, .. }, VKey::Scalar(v)) => {
                if v < 0 || v > 2 * n as i64 {
                    return Vec::new();
                }
                if alphabet.size() == 2 && v != 2 * n as i64 {
                    return Vec::new();
                }
                (0..=v).collect()
            }
            (Model::Block { params }, VKey::TR { t, r }) => {
                fiber_block(t, r, n, params.l())
            }
            _ => Vec::new(),
        }
    }

    /// Closed-form conditional pmf `P(Z = z | U = u, V = v)`.
    pub fn conditional_pair_pmf(&self, n: usize, key: UvKey, z: &SequencePair) -> Result<f64> {
        if self.uv_of(z)? != key {
            return Ok(0.0);
        }
        match (self, key.v) {
            (
                Model::Iid {
                    alphabet, dist, a, b,
                },
                VKey::Scalar(v),
            ) => {
                let u = key.u;
                let rest = 2 * n as i64 - v;
                let coeff = crate::num::multinomial_coeff(&[
                    u as u64,
                    (v - u) as u64,
                    rest as u64,
                ]);
                let p = dist.prob(*a) + dist.prob(*b);
                let mut others = 1.0;
                for c in 0..alphabet.size() {
                    if c == *a || c == *b {
                        continue;
                    }
                    let qc = dist.prob(c) / (1.0 - p);
                    let m = z.count(c as u8);
                    others *= qc.powi(m as i32);
                }
                Ok(others / coeff)
            }
            (Model::Block { params }, VKey::TR { t, r }) => {
                let stats = tur_to_blocks(t, key.u, r, n, params.l())?;
                let coeff = crate::num::multinomial_coeff(&[stats.b1, stats.b2, stats.b3]);
                Ok(0.5 / coeff * block_seq_prob(&z.y, params)?)
            }
            _ => Ok(0.0),
        }
    }

    /// Enumerate the sample space of one component with probabilities.
    pub fn enumerate_x(&self, n: usize) -> Vec<(Sequence, f64)> {
        match self {
            Model::Iid {
                alphabet, dist, ..
            } => enumerate_iid_x(dist, alphabet, n),
            Model::Block { params } => enumerate_block_x(params, n),
        }
    }

    /// Size of the one-component sample space, for enumeration guards.
    pub fn count_x(&self, n: usize) -> u128 {
        match self {
            Model::Iid { alphabet, .. } => (alphabet.size() as u128).pow(n as u32),
            Model::Block { params } => count_block_x(params, n),
        }
    }

    /// The `+- c sqrt(.)` typical windows around the means of `U` and `V`.
    /// `c = 1` reproduces the i.i.d. windows `2np +- sqrt(2n)` and
    /// `v p_b +- sqrt(v)`.
    pub fn typical_sets(&self, n: usize, c: f64) -> TypicalSets {
        match self {
            Model::Iid { dist, a, b, .. } => {
                let p = dist.prob(*a) + dist.prob(*b);
                let pb = dist.prob(*b) / p;
                let center = 2.0 * n as f64 * p;
                let half = c * (2.0 * n as f64).sqrt();
                TypicalSets::Iid {
                    pb,
                    c,
                    v_lo: center - half,
                    v_hi: center + half,
                }
            }
            Model::Block { params } => {
                let nf = n as f64;
                let mu = params.mu();
                let [q1, q2, q3] = params.q();
                let u_center = nf / mu * (q2 - q1 - q3);
                let t_center = nf / mu;
                let half = c * nf.sqrt();
                TypicalSets::Block {
                    l: params.l(),
                    u_lo: u_center - half,
                    u_hi: u_center + half,
                    t_lo: t_center - half,
                    t_hi: t_center + half,
                }
            }
        }
    }
}

/// Typical-set windows; membership is tested on the integer statistics.
#[derive(Debug, Clone, Serialize)]
pub enum TypicalSets {
    Iid {
        pb: f64,
        c: f64,
        v_lo: f64,
        v_hi: f64,
    },
    Block {
        l: usize,
        u_lo: f64,
        u_hi: f64,
        t_lo: f64,
        t_hi: f64,
    },
}

impl TypicalSets {
    pub fn v_contains(&self, v: &VKey) -> bool {
        match (self, v) {
            (TypicalSets::Iid { v_lo, v_hi, .. }, VKey::Scalar(v)) => {
                let vf = *v as f64;
                vf >= *v_lo && vf <= *v_hi
            }
            (
                TypicalSets::Block {
                    l, t_lo, t_hi, ..
                },
                VKey::TR { t, r },
            ) => {
                let tf = *t as f64;
                tf >= *t_lo && tf <= *t_hi && *r >= 1 && *r <= *l as i64 + 1
            }
            _ => false,
        }
    }

    /// The `U` window attached to a particular `v`.
    pub fn u_window(&self, v: &VKey) -> (f64, f64) {
        match (self, v) {
            (TypicalSets::Iid { pb, c, .. }, VKey::Scalar(v)) => {
                let vf = *v as f64;
                let half = c * vf.max(0.0).sqrt();
                (vf * pb - half, vf * pb + half)
            }
            (TypicalSets::Block { u_lo, u_hi, .. }, _) => (*u_lo, *u_hi),
            _ => (f64::NAN, f64::NAN),
        }
    }

    pub fn u_contains(&self, key: &UvKey) -> bool {
        let (lo, hi) = self.u_window(&key.v);
        let uf = key.u as f64;
        uf >= lo && uf <= hi
    }

    pub fn contains(&self, key: &UvKey) -> bool {
        self.v_contains(&key.v) && self.u_contains(key)
    }

    /// The scalar `V` (i.i.d.) or `T` (block) window.
    pub fn v_window(&self) -> (f64, f64) {
        match self {
            TypicalSets::Iid { v_lo, v_hi, .. } => (*v_lo, *v_hi),
            TypicalSets::Block { t_lo, t_hi, .. } => (*t_lo, *t_hi),
        }
    }
}
