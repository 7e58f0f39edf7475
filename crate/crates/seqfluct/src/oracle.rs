//! Exact small-instance enumeration: full laws over sequence pairs,
//! conditional laws on `(u, v)` fibers, transformation push-forwards, total
//! variation distances, and exact moments of the optimal score.
//!
//! Everything here is deterministic and guarded: enumeration refuses sample
//! spaces beyond [`ENUMERATION_GUARD`] pairs instead of silently sampling.

use std::collections::BTreeMap;

use crate::align::pair_score;
use crate::error::{Error, Result};
use crate::models::{Model, UvKey, VKey};
use crate::num::{binom_pmf, ln_multinomial_coeff};
use crate::scoring::ScoringScheme;
use crate::seq::{Sequence, SequencePair};
use crate::transform::Transform;

/// Largest number of sequence pairs an exhaustive suite will materialise.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// Canonical encoding of a sequence pair; lexicographic order makes law
/// supports comparable outcome-by-outcome.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl PairKey {
    pub fn of(z: &SequencePair) -> Self {
        PairKey {
            x: z.x.indices().to_vec(),
            y: z.y.indices().to_vec(),
        }
    }

    pub fn to_pair(&self, model: &Model) -> SequencePair {
        let al = model.alphabet();
        SequencePair::new(
            Sequence::from_indices(al.clone(), self.x.clone()).expect("valid key"),
            Sequence::from_indices(al, self.y.clone()).expect("valid key"),
        )
        .expect("key encodes a valid pair")
    }
}

/// A finite law: distinct sorted outcomes with positive probabilities.
#[derive(Debug, Clone)]
pub struct DiscreteLaw<K: Ord> {
    items: Vec<(K, f64)>,
}

impl<K: Ord> DiscreteLaw<K> {
    pub fn from_map(map: BTreeMap<K, f64>) -> Self {
        DiscreteLaw {
            items: map.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        }
    }

    pub fn items(&self) -> &[(K, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.items.iter().map(|(_, p)| p).sum()
    }

    pub fn prob(&self, key: &K) -> f64 {
        match self.items.binary_search_by(|(k, _)| k.cmp(key)) {
            Ok(i) => self.items[i].1,
            Err(_) => 0.0,
        }
    }

    fn renormalised(mut self) -> Self {
        let total = self.total();
        for (_, p) in &mut self.items {
            *p /= total;
        }
        self
    }
}

/// Total variation distance `1/2 sum |p - q|` over the merged support.
pub fn tv_distance<K: Ord>(p: &DiscreteLaw<K>, q: &DiscreteLaw<K>) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < p.items.len() || j < q.items.len() {
        match (p.items.get(i), q.items.get(j)) {
            (Some((kp, vp)), Some((kq, vq))) => match kp.cmp(kq) {
                std::cmp::Ordering::Less => {
                    acc += vp;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    acc += vq;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    acc += (vp - vq).abs();
                    i += 1;
                    j += 1;
                }
            },
            (Some((_, vp)), None) => {
                acc += vp;
                i += 1;
            }
            (None, Some((_, vq))) => {
                acc += vq;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    acc / 2.0
}

fn guard_pairs(model: &Model, n: usize) -> Result<()> {
    let count = model.count_x(n);
    if count.saturating_mul(count) > ENUMERATION_GUARD {
        return Err(Error::Guard(format!(
            "{}^2 = {} pairs exceeds the enumeration guard of {ENUMERATION_GUARD}",
            count,
            count.saturating_mul(count)
        )));
    }
    Ok(())
}

/// The full law of `Z = (X, Y)` at length `n`.
pub fn enumerate_model(model: &Model, n: usize) -> Result<DiscreteLaw<PairKey>> {
    guard_pairs(model, n)?;
    let mut xs = model.enumerate_x(n);
    xs.sort_by(|a, b| a.0.indices().cmp(b.0.indices()));
    let mut items = Vec::with_capacity(xs.len() * xs.len());
    for (x, px) in &xs {
        for (y, py) in &xs {
            items.push((
                PairKey {
                    x: x.indices().to_vec(),
                    y: y.indices().to_vec(),
                },
                px * py,
            ));
        }
    }
    Ok(DiscreteLaw { items })
}

/// All `(u, v)` values with positive probability, sorted.
pub fn uv_support(model: &Model, n: usize) -> Result<Vec<UvKey>> {
    let law = enumerate_model(model, n)?;
    let mut keys = std::collections::BTreeSet::new();
    for (key, _) in law.items() {
        keys.insert(model.uv_of(&key.to_pair(model))?);
    }
    Ok(keys.into_iter().collect())
}

/// The conditional law `P_{(u,v)}` by restriction and renormalisation.
pub fn conditional_law(model: &Model, n: usize, at: UvKey) -> Result<DiscreteLaw<PairKey>> {
    let law = enumerate_model(model, n)?;
    let mut items = Vec::new();
    for (key, p) in law.items {
        if model.uv_of(&key.to_pair(model))? == at {
            items.push((key, p));
        }
    }
    if items.is_empty() {
        return Err(Error::EmptyFiber(format!("no outcome has {at}")));
    }
    Ok(DiscreteLaw { items }.renormalised())
}

/// The law of `Z~` when `Z ~ P_{(u,v)}`, by exact outcome enumeration.
/// Errors if the transformation is inapplicable anywhere on the fiber.
pub fn pushforward(
    model: &Model,
    n: usize,
    at: UvKey,
    transform: &Transform,
) -> Result<DiscreteLaw<PairKey>> {
    let cond = conditional_law(model, n, at)?;
    let mut map: BTreeMap<PairKey, f64> = BTreeMap::new();
    for (key, p) in cond.items() {
        let outcomes = transform.outcomes(&key.to_pair(model))?;
        for (zt, q) in &outcomes.items {
            *map.entry(PairKey::of(zt)).or_insert(0.0) += p * q;
        }
    }
    Ok(DiscreteLaw::from_map(map))
}

/// Exact mean and variance of the optimal score by full enumeration.
pub fn exact_moments(model: &Model, n: usize, scheme: &ScoringScheme) -> Result<(f64, f64)> {
    let law = enumerate_model(model, n)?;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (key, p) in law.items() {
        let score = pair_score(&key.to_pair(model), scheme)?;
        mean += p * score;
        second += p * score * score;
    }
    Ok((mean, second - mean * mean))
}

/// Exact conditional means `l(u, v) = E[L | U = u, V = v]`.
pub fn exact_conditional_means(
    model: &Model,
    n: usize,
    scheme: &ScoringScheme,
) -> Result<BTreeMap<UvKey, f64>> {
    let law = enumerate_model(model, n)?;
    let mut acc: BTreeMap<UvKey, (f64, f64)> = BTreeMap::new();
    for (key, p) in law.items() {
        let pair = key.to_pair(model);
        let uv = model.uv_of(&pair)?;
        let score = pair_score(&pair, scheme)?;
        let entry = acc.entry(uv).or_insert((0.0, 0.0));
        entry.0 += p;
        entry.1 += p * score;
    }
    Ok(acc
        .into_iter()
        .map(|(k, (mass, weighted))| (k, weighted / mass))
        .collect())
}

/// Both sides of the conditional variance decomposition
/// `Var L = E Var[L|U,V] + Var E[L|U,V]`, computed exactly.
#[derive(Debug, Clone, Copy)]
pub struct Decomposition {
    pub var_total: f64,
    pub mean_cond_var: f64,
    pub var_cond_mean: f64,
}

pub fn variance_decomposition(
    model: &Model,
    n: usize,
    scheme: &ScoringScheme,
) -> Result<Decomposition> {
    let law = enumerate_model(model, n)?;
    let mut total = (0.0, 0.0);
    let mut per_key: BTreeMap<UvKey, (f64, f64, f64)> = BTreeMap::new();
    for (key, p) in law.items() {
        let pair = key.to_pair(model);
        let uv = model.uv_of(&pair)?;
        let score = pair_score(&pair, scheme)?;
        total.0 += p * score;
        total.1 += p * score * score;
        let e = per_key.entry(uv).or_insert((0.0, 0.0, 0.0));
        e.0 += p;
        e.1 += p * score;
        e.2 += p * score * score;
    }
    let var_total = total.1 - total.0 * total.0;
    let mut mean_cond_var = 0.0;
    let mut second_cond_mean = 0.0;
    for (_, (mass, s1, s2)) in &per_key {
        let m = s1 / mass;
        mean_cond_var += mass * (s2 / mass - m * m);
        second_cond_mean += mass * m * m;
    }
    let var_cond_mean = second_cond_mean - total.0 * total.0;
    Ok(Decomposition {
        var_total,
        mean_cond_var,
        var_cond_mean,
    })
}

/// Local-CLT diagnostic: `min sqrt(m) P(X = i)` for `X ~ B(m, p)` over the
/// central window `[mp - beta sqrt(m), mp + beta sqrt(m)]`.
pub fn binomial_window_floor(m: u64, p: f64, beta: f64) -> f64 {
    let center = m as f64 * p;
    let half = beta * (m as f64).sqrt();
    let lo = (center - half).ceil().max(0.0) as u64;
    let hi = (center + half).floor().min(m as f64) as u64;
    let mut min = f64::INFINITY;
    for i in lo..=hi {
        min = min.min((m as f64).sqrt() * binom_pmf(m, p, i));
    }
    min
}

/// Multinomial analogue: `min m P(X = i, Y = j)` for the first two counts of
/// a 3-cell multinomial over the central product window.
pub fn multinomial_window_floor(m: u64, q: [f64; 3], beta: f64) -> f64 {
    let half = beta * (m as f64).sqrt();
    let c1 = m as f64 * q[0];
    let c2 = m as f64 * q[1];
    let lo1 = (c1 - half).ceil().max(0.0) as u64;
    let hi1 = (c1 + half).floor().min(m as f64) as u64;
    let lo2 = (c2 - half).ceil().max(0.0) as u64;
    let hi2 = (c2 + half).floor().min(m as f64) as u64;
    let mut min = f64::INFINITY;
    for i in lo1..=hi1 {
        for j in lo2..=hi2 {
            if i + j > m {
                continue;
            }
            let k = m - i - j;
            let pmf = (ln_multinomial_coeff(&[i, j, k])
                + i as f64 * q[0].ln()
                + j as f64 * q[1].ln()
                + k as f64 * q[2].ln())
            .exp();
            min = min.min(m as f64 * pmf);
        }
    }
    min
}

/// Extremes of the consecutive-fiber pmf ratio `p(u+4) / p(u)` over the
/// typical windows of the block model; the ratio approaches one at rate
/// `1/sqrt(n)`.
pub fn block_quotient_extremes(
    params: &crate::models::BlockModelParams,
    n: usize,
    c: f64,
) -> (f64, f64) {
    let model = Model::block(params.clone());
    let ts = model.typical_sets(n, c);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let (t_lo, t_hi) = ts.v_window();
    for t in (t_lo.ceil() as i64)..=(t_hi.floor() as i64) {
        for r in 1..=(params.l() as i64 + 1) {
            let v = VKey::TR { t, r };
            let fiber = model.fiber(n, v);
            for &u in &fiber {
                let here = UvKey { u, v };
                let next = UvKey { u: u + 4, v };
                if !ts.contains(&here) || !ts.contains(&next) {
                    continue;
                }
                let p0 = model.uv_pmf(n, here);
                let p1 = model.uv_pmf(n, next);
                if p0 > 0.0 && p1 > 0.0 {
                    let ratio = p1 / p0;
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
        }
    }
    (lo, hi)
}
