//! Monte Carlo verifiers for the two-step variance lower-bound machinery:
//! moment estimation, the `Var/n` scan, the `A1`/`A2` transformation checks,
//! conditional-mean monotonicity profiles, conditional-variance growth,
//! typical-set coverage, and the exact point-mass floor.
//!
//! Sampling is embarrassingly parallel: sample `i` always draws from
//! `RandomStream::substream(seed, i)` and partial results are folded in a
//! fixed chunk order, so every report is bit-identical for a given seed no
//! matter how many workers run it. A1's inner conditional expectation is
//! computed exactly from the outcome enumeration; only the outer probability
//! is sampled. A2 is a hard invariant: a single violation aborts with an
//! invariant-violation error rather than a statistic.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::align::pair_score;
use crate::error::{Error, Result};
use crate::models::{Model, TypicalSets, UvKey, VKey};
use crate::num::binom_pmf;
use crate::report::fingerprint;
use crate::rng::RandomStream;
use crate::scoring::ScoringScheme;
use crate::transform::Transform;

/// Fixed work-chunk size; independent of worker count by construction.
const CHUNK: u64 = 1024;

/// Number of jackknife batches for variance confidence intervals.
const JACKKNIFE_BATCHES: usize = 50;

/// Bins with fewer hits are reported but excluded from monotonicity and
/// conditional-variance summaries.
pub const BIN_HIT_THRESHOLD: u64 = 30;

/// A Monte Carlo point estimate with a 95% confidence half-width and the
/// provenance needed to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub name: String,
    pub point: f64,
    pub half_width: f64,
    pub samples: u64,
    pub seed: u64,
    pub params_fingerprint: String,
}

/// Deterministic parallel fold: chunks of fixed size are processed in
/// parallel and merged in index order.
fn par_fold<T, FInit, FBody, FMerge>(samples: u64, init: FInit, body: FBody, merge: FMerge) -> T
where
    T: Send,
    FInit: Fn() -> T + Sync + Send,
    FBody: Fn(&mut T, u64) + Sync + Send,
    FMerge: Fn(T, T) -> T,
{
    let starts: Vec<u64> = (0..samples.div_ceil(CHUNK)).map(|c| c * CHUNK).collect();
    let parts: Vec<T> = starts
        .par_iter()
        .map(|&lo| {
            let hi = (lo + CHUNK).min(samples);
            let mut acc = init();
            for i in lo..hi {
                body(&mut acc, i);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// One-pass mean/variance accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64,
        }
    }

    fn var(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n - 1) as f64
    }
}

/// Per-batch accumulators for jackknife confidence intervals.
#[derive(Clone)]
struct BatchedMoments {
    batches: Vec<Welford>,
}

impl BatchedMoments {
    fn new() -> Self {
        BatchedMoments {
            batches: vec![Welford::default(); JACKKNIFE_BATCHES],
        }
    }

    fn push(&mut self, i: u64, x: f64) {
        self.batches[(i % JACKKNIFE_BATCHES as u64) as usize].push(x);
    }

    fn merge(mut self, other: BatchedMoments) -> BatchedMoments {
        for (a, b) in self.batches.iter_mut().zip(other.batches) {
            *a = a.merge(b);
        }
        self
    }

    fn total(&self) -> Welford {
        self.batches
            .iter()
            .fold(Welford::default(), |acc, &b| acc.merge(b))
    }

    /// Variance point estimate with a jackknife-over-batches 95% half-width.
    fn variance_ci(&self) -> (f64, f64) {
        let theta = self.total().var();
        let mut leave_outs = Vec::new();
        for skip in 0..self.batches.len() {
            if self.batches[skip].n == 0 {
                continue;
            }
            let rest = self
                .batches
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .fold(Welford::default(), |acc, (_, &b)| acc.merge(b));
            if rest.n >= 2 {
                leave_outs.push(rest.var());
            }
        }
        if leave_outs.len() < 2 {
            return (theta, f64::NAN);
        }
        let b = leave_outs.len() as f64;
        let mean = leave_outs.iter().sum::<f64>() / b;
        let var_jack =
            (b - 1.0) / b * leave_outs.iter().map(|t| (t - mean).powi(2)).sum::<f64>();
        (theta, 1.96 * var_jack.sqrt())
    }
}

/// Exact mean and Monte Carlo moment estimates for `L_n`, plus
/// `gamma_hat = mean / n`.
#[derive(Debug, Clone, Serialize)]
pub struct McMoments {
    pub mean: EstimateReport,
    pub variance: EstimateReport,
    pub gamma: EstimateReport,
}

pub fn mc_moments(
    model: &Model,
    n: usize,
    scheme: &ScoringScheme,
    samples: u64,
    seed: u64,
) -> Result<McMoments> {
    if samples < 2 {
        return Err(Error::Validation("need at least 2 samples".into()));
    }
    let fp = fingerprint(&("mc-moments", model, scheme, n, samples, seed));
    let acc = par_fold(
        samples,
        BatchedMoments::new,
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let z = model.sample_pair(n, &mut rng);
            let score = pair_score(&z, scheme).expect("sampled pair is scoreable");
            acc.push(i, score);
        },
        BatchedMoments::merge,
    );
    let total = acc.total();
    let mean_hw = 1.96 * (total.var() / total.n as f64).sqrt();
    let (var_hat, var_hw) = acc.variance_ci();
    Ok(McMoments {
        mean: EstimateReport {
            name: "mean_L".into(),
            point: total.mean,
            half_width: mean_hw,
            samples,
            seed,
            params_fingerprint: fp.clone(),
        },
        variance: EstimateReport {
            name: "var_L".into(),
            point: var_hat,
            half_width: var_hw,
            samples,
            seed,
            params_fingerprint: fp.clone(),
        },
        gamma: EstimateReport {
            name: "gamma_hat".into(),
            point: total.mean / n as f64,
            half_width: mean_hw / n as f64,
            samples,
            seed,
            params_fingerprint: fp,
        },
    })
}

/// One row of the variance scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub var_hat: f64,
    pub ci95: f64,
    pub ratio: f64,
}

/// `Var[L_n]` across a ladder of `n`, with the linear-fit slope and the
/// extremes of `Var/n`.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceScan {
    pub rows: Vec<ScanRow>,
    pub slope: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub samples: u64,
    pub seed: u64,
    pub params_fingerprint: String,
}

pub fn variance_scan(
    model: &Model,
    scheme: &ScoringScheme,
    n_list: &[usize],
    samples: u64,
    seed: u64,
) -> Result<VarianceScan> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "n_list must be nonempty and strictly increasing".into(),
        ));
    }
    let fp = fingerprint(&("variance-scan", model, scheme, n_list, samples, seed));
    let mut rows = Vec::with_capacity(n_list.len());
    for (j, &n) in n_list.iter().enumerate() {
        // separate substream namespace per scan point
        let base = (j as u64) << 40;
        let acc = par_fold(
            samples,
            BatchedMoments::new,
            |acc, i| {
                let mut rng = RandomStream::substream(seed, base | i);
                let z = model.sample_pair(n, &mut rng);
                let score = pair_score(&z, scheme).expect("sampled pair is scoreable");
                acc.push(i, score);
            },
            BatchedMoments::merge,
        );
        let (var_hat, ci95) = acc.variance_ci();
        rows.push(ScanRow {
            n,
            var_hat,
            ci95,
            ratio: var_hat / n as f64,
        });
    }
    // least-squares slope of var_hat against n
    let k = rows.len() as f64;
    let mean_n = rows.iter().map(|r| r.n as f64).sum::<f64>() / k;
    let mean_v = rows.iter().map(|r| r.var_hat).sum::<f64>() / k;
    let sxx: f64 = rows.iter().map(|r| (r.n as f64 - mean_n).powi(2)).sum();
    let sxy: f64 = rows
        .iter()
        .map(|r| (r.n as f64 - mean_n) * (r.var_hat - mean_v))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(VarianceScan {
        rows,
        slope,
        ratio_min,
        ratio_max,
        samples,
        seed,
        params_fingerprint: fp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Empirical distribution of the exact conditional gain
/// `E[L(Z~) - L(Z) | Z]` and the fraction of samples at or above `eps0`.
#[derive(Debug, Clone, Serialize)]
pub struct A1Report {
    /// Threshold used; the first percentile of observed gains when the
    /// caller leaves it unspecified.
    pub eps0: f64,
    pub eps0_was_given: bool,
    pub frac_ge_eps0: EstimateReport,
    /// Samples where the transformation could not act; counted as failures
    /// of the event and reported separately.
    pub inapplicable: u64,
    pub quantiles: Vec<(f64, f64)>,
    pub histogram: Vec<HistogramBin>,
    pub mean_gain: f64,
    pub min_gain: f64,
    pub max_gain: f64,
}

pub fn verify_a1(
    model: &Model,
    n: usize,
    transform: &Transform,
    scheme: &ScoringScheme,
    eps0: Option<f64>,
    samples: u64,
    seed: u64,
) -> Result<A1Report> {
    if let Some(e) = eps0 {
        if !(e > 0.0) {
            return Err(Error::Validation(format!("eps0 must be > 0, got {e}")));
        }
    }
    if samples == 0 {
        return Err(Error::Validation("need at least 1 sample".into()));
    }
    transform.validate()?;
    let fp = fingerprint(&("verify-a1", model, scheme, transform, n, eps0, samples, seed));
    let (gains, inapplicable) = par_fold(
        samples,
        || (Vec::new(), 0u64),
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let z = model.sample_pair(n, &mut rng);
            match transform.expected_gain(&z, scheme) {
                Ok(g) => acc.0.push(g),
                Err(Error::Inapplicable(_)) => acc.1 += 1,
                Err(e) => panic!("unexpected error in expected_gain: {e}"),
            }
        },
        |mut a, b| {
            a.0.extend(b.0);
            a.1 += b.1;
            a
        },
    );
    if gains.is_empty() {
        let report = EstimateReport {
            name: "frac_gain_ge_eps0".into(),
            point: 0.0,
            half_width: 0.0,
            samples,
            seed,
            params_fingerprint: fp,
        };
        return Ok(A1Report {
            eps0: eps0.unwrap_or(f64::NAN),
            eps0_was_given: eps0.is_some(),
            frac_ge_eps0: report,
            inapplicable,
            quantiles: Vec::new(),
            histogram: Vec::new(),
            mean_gain: f64::NAN,
            min_gain: f64::NAN,
            max_gain: f64::NAN,
        });
    }
    let mut sorted = gains.clone();
    sorted.sort_by(f64::total_cmp);
    let eps0_used = eps0.unwrap_or_else(|| quantile(&sorted, 0.01));
    // inapplicable samples count against the event
    let hits = sorted.iter().filter(|&&g| g >= eps0_used).count() as f64;
    let frac = hits / samples as f64;
    let hw = 1.96 * (frac * (1.0 - frac) / samples as f64).sqrt();
    let grid = [0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999];
    let quantiles = grid.iter().map(|&q| (q, quantile(&sorted, q))).collect();
    Ok(A1Report {
        eps0: eps0_used,
        eps0_was_given: eps0.is_some(),
        frac_ge_eps0: EstimateReport {
            name: "frac_gain_ge_eps0".into(),
            point: frac,
            half_width: hw,
            samples,
            seed,
            params_fingerprint: fp,
        },
        inapplicable,
        quantiles,
        histogram: histogram(&sorted, 20),
        mean_gain: sorted.iter().sum::<f64>() / sorted.len() as f64,
        min_gain: sorted[0],
        max_gain: *sorted.last().unwrap(),
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn histogram(sorted: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = sorted[0];
    let hi = *sorted.last().unwrap();
    if lo == hi {
        return vec![HistogramBin {
            lo,
            hi,
            count: sorted.len() as u64,
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: lo + b as f64 * width,
            hi: lo + (b + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &g in sorted {
        let b = (((g - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Result of the hard `A2` check: the minimum single-application gain over
/// all samples and all enumerated outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct A2Report {
    pub min_gain: f64,
    pub bound: f64,
    pub samples: u64,
    pub applicable: u64,
    pub inapplicable: u64,
    pub seed: u64,
    pub params_fingerprint: String,
}

pub fn verify_a2(
    model: &Model,
    n: usize,
    transform: &Transform,
    scheme: &ScoringScheme,
    samples: u64,
    seed: u64,
) -> Result<A2Report> {
    transform.validate()?;
    let fp = fingerprint(&("verify-a2", model, scheme, transform, n, samples, seed));
    let (min_gain, applicable, inapplicable) = par_fold(
        samples,
        || (f64::INFINITY, 0u64, 0u64),
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let z = model.sample_pair(n, &mut rng);
            match transform.min_gain(&z, scheme) {
                Ok(g) => {
                    acc.0 = acc.0.min(g);
                    acc.1 += 1;
                }
                Err(Error::Inapplicable(_)) => acc.2 += 1,
                Err(e) => panic!("unexpected error in min_gain: {e}"),
            }
        },
        |a, b| (a.0.min(b.0), a.1 + b.1, a.2 + b.2),
    );
    let bound = transform.gain_lower_bound(scheme);
    if min_gain < bound - 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "observed gain {min_gain} below the hard bound {bound}"
        )));
    }
    Ok(A2Report {
        min_gain,
        bound,
        samples,
        applicable,
        inapplicable,
        seed,
        params_fingerprint: fp,
    })
}

/// One `(u, v)` bin of the conditional profile.
#[derive(Debug, Clone, Serialize)]
pub struct BinRow {
    pub u: i64,
    pub v: VKey,
    pub count: u64,
    pub mean: f64,
    pub var: f64,
}

/// A consecutive-fiber gap estimate `l(u + k0, v) - l(u, v)`.
#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub v: VKey,
    pub u: i64,
    pub gap: f64,
    pub se: f64,
}

/// Binned conditional means of `L` over the typical sets plus the
/// monotonicity summary of condition 1.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalProfile {
    pub bins: Vec<BinRow>,
    pub gaps: Vec<GapRow>,
    /// Fraction of consecutive-pair gaps with positive point estimate.
    pub frac_positive: f64,
    /// The profile's estimate of the uniform gap: the precision-weighted
    /// mean of the per-pair gap estimates.
    pub delta_hat: f64,
    pub delta_hat_se: f64,
    /// Smallest raw gap estimate; dominated by the noisiest qualifying bins,
    /// reported alongside the pooled estimate.
    pub min_gap: f64,
    pub threshold: u64,
    pub skipped_bins: usize,
    pub c: f64,
    pub samples: u64,
    pub in_typical: u64,
    pub seed: u64,
    pub params_fingerprint: String,
}

pub fn conditional_profile(
    model: &Model,
    n: usize,
    scheme: &ScoringScheme,
    samples: u64,
    seed: u64,
    c: f64,
) -> Result<ConditionalProfile> {
    if samples == 0 {
        return Err(Error::Validation("need at least 1 sample".into()));
    }
    let fp = fingerprint(&("profile", model, scheme, n, samples, seed, c));
    let ts = model.typical_sets(n, c);
    let bins = par_fold(
        samples,
        BTreeMap::<UvKey, Welford>::new,
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let z = model.sample_pair(n, &mut rng);
            let key = model.uv_of(&z).expect("sampled pair has statistics");
            if ts.contains(&key) {
                let score = pair_score(&z, scheme).expect("sampled pair is scoreable");
                acc.entry(key).or_default().push(score);
            }
        },
        |mut a, b| {
            for (k, w) in b {
                let entry = a.entry(k).or_default();
                *entry = entry.merge(w);
            }
            a
        },
    );
    let in_typical: u64 = bins.values().map(|w| w.n).sum();
    let skipped_bins = bins.values().filter(|w| w.n < BIN_HIT_THRESHOLD).count();

    // group by v, walk consecutive fiber points
    let k0 = model.k0();
    let mut by_v: BTreeMap<VKey, Vec<(i64, Welford)>> = BTreeMap::new();
    for (key, w) in &bins {
        by_v.entry(key.v).or_default().push((key.u, *w));
    }
    let mut gaps = Vec::new();
    for (v, us) in &by_v {
        for pair in us.windows(2) {
            let (u1, w1) = pair[0];
            let (u2, w2) = pair[1];
            if u2 - u1 != k0 || w1.n < BIN_HIT_THRESHOLD || w2.n < BIN_HIT_THRESHOLD {
                continue;
            }
            gaps.push(GapRow {
                v: *v,
                u: u1,
                gap: w2.mean - w1.mean,
                se: (w1.var() / w1.n as f64 + w2.var() / w2.n as f64).sqrt(),
            });
        }
    }
    let positive = gaps.iter().filter(|g| g.gap > 0.0).count();
    let frac_positive = if gaps.is_empty() {
        f64::NAN
    } else {
        positive as f64 / gaps.len() as f64
    };
    let min_gap = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let wsum: f64 = gaps.iter().map(|g| 1.0 / (g.se * g.se)).sum();
    let delta_hat = gaps.iter().map(|g| g.gap / (g.se * g.se)).sum::<f64>() / wsum;
    let delta_hat_se = (1.0 / wsum).sqrt();
    Ok(ConditionalProfile {
        bins: bins
            .iter()
            .map(|(k, w)| BinRow {
                u: k.u,
                v: k.v,
                count: w.n,
                mean: w.mean,
                var: w.var(),
            })
            .collect(),
        gaps,
        frac_positive,
        delta_hat,
        delta_hat_se,
        min_gap,
        threshold: BIN_HIT_THRESHOLD,
        skipped_bins,
        c,
        samples,
        in_typical,
        seed,
        params_fingerprint: fp,
    })
}

/// Per-`v` conditional variance of `U` restricted to its typical window.
#[derive(Debug, Clone, Serialize)]
pub struct CondVarRow {
    pub v: VKey,
    pub count: u64,
    pub var: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CondVarReport {
    pub rows: Vec<CondVarRow>,
    /// `min_v Var[U_(v) | U in window] / n` over qualifying `v`.
    pub min_ratio: f64,
    /// True when the rows come from the closed-form law, not sampling.
    pub exact: bool,
    pub c: f64,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub params_fingerprint: String,
}

pub fn conditional_variance(
    model: &Model,
    n: usize,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<CondVarReport> {
    let fp = fingerprint(&("cond-var", model, n, c, samples, seed));
    let ts = model.typical_sets(n, c);
    match model {
        Model::Iid { .. } => {
            // U given V = v is binomial; restrict it to the window exactly.
            let mut rows = Vec::new();
            let (v_lo, v_hi) = ts.v_window();
            for v in (v_lo.ceil().max(0.0) as i64)..=(v_hi.floor().min(2.0 * n as f64) as i64) {
                let vk = VKey::Scalar(v);
                if model.fiber(n, vk).is_empty() {
                    continue;
                }
                let (var, _mass) = truncated_u_variance(model, n, &ts, vk);
                rows.push(CondVarRow {
                    v: vk,
                    count: 0,
                    var,
                    ratio: var / n as f64,
                });
            }
            let min_ratio = rows
                .iter()
                .map(|r| r.ratio)
                .fold(f64::INFINITY, f64::min);
            Ok(CondVarReport {
                rows,
                min_ratio,
                exact: true,
                c,
                n,
                samples: 0,
                seed,
                params_fingerprint: fp,
            })
        }
        Model::Block { .. } => {
            if samples == 0 {
                return Err(Error::Validation("need at least 1 sample".into()));
            }
            let bins = par_fold(
                samples,
                BTreeMap::<VKey, Welford>::new,
                |acc, i| {
                    let mut rng = RandomStream::substream(seed, i);
                    let key = model.sample_uv(n, &mut rng);
                    if ts.contains(&key) {
                        acc.entry(key.v).or_default().push(key.u as f64);
                    }
                },
                |mut a, b| {
                    for (k, w) in b {
                        let entry = a.entry(k).or_default();
                        *entry = entry.merge(w);
                    }
                    a
                },
            );
            let rows: Vec<CondVarRow> = bins
                .iter()
                .map(|(v, w)| CondVarRow {
                    v: *v,
                    count: w.n,
                    var: w.var(),
                    ratio: w.var() / n as f64,
                })
                .collect();
            let min_ratio = rows
                .iter()
                .filter(|r| r.count >= BIN_HIT_THRESHOLD)
                .map(|r| r.ratio)
                .fold(f64::INFINITY, f64::min);
            Ok(CondVarReport {
                rows,
                min_ratio,
                exact: false,
                c,
                n,
                samples,
                seed,
                params_fingerprint: fp,
            })
        }
    }
}

/// Exact `Var[U_(v) | U_(v) in window]` and the window mass, from the
/// closed-form conditional law.
fn truncated_u_variance(model: &Model, n: usize, ts: &TypicalSets, v: VKey) -> (f64, f64) {
    let (lo, hi) = ts.u_window(&v);
    let items: Vec<(i64, f64)> = model
        .fiber(n, v)
        .into_iter()
        .filter(|&u| (u as f64) >= lo && (u as f64) <= hi)
        .map(|u| (u, model.uv_pmf(n, UvKey { u, v })))
        .collect();
    let mass: f64 = items.iter().map(|&(_, w)| w).sum();
    let (_, var) = crate::num::weighted_mean_var(&items);
    (var, mass)
}

/// Exact binomial window masses for the i.i.d. model at `c = 1`, against the
/// Chebyshev floors `1 - p(1-p)` and `1 - pb(1-pb)`.
#[derive(Debug, Clone, Serialize)]
pub struct IidCoverageExact {
    pub v_coverage: f64,
    pub v_floor: f64,
    pub min_u_coverage: f64,
    pub u_floor: f64,
    pub joint: f64,
}

/// Empirical (and, for the i.i.d. model, exact) typical-set coverage
/// `P(U in U_n, V in V_n)`.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub empirical: EstimateReport,
    pub exact: Option<IidCoverageExact>,
    pub c: f64,
    pub n: usize,
}

pub fn coverage_check(
    model: &Model,
    n: usize,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<CoverageReport> {
    if !(c > 0.0) {
        return Err(Error::Validation(format!("c must be > 0, got {c}")));
    }
    if samples == 0 {
        return Err(Error::Validation("need at least 1 sample".into()));
    }
    let fp = fingerprint(&("coverage", model, n, c, samples, seed));
    let ts = model.typical_sets(n, c);
    let hits = par_fold(
        samples,
        || 0u64,
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let key = model.sample_uv(n, &mut rng);
            if ts.contains(&key) {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    let frac = hits as f64 / samples as f64;
    let hw = 1.96 * (frac * (1.0 - frac) / samples as f64).sqrt();
    let exact = match model {
        Model::Iid { dist, a, b, .. } => {
            let p = dist.prob(*a) + dist.prob(*b);
            let pb = dist.prob(*b) / p;
            let (v_lo, v_hi) = ts.v_window();
            let mut v_cov = 0.0;
            let mut min_u_cov = f64::INFINITY;
            let mut joint = 0.0;
            for v in (v_lo.ceil().max(0.0) as i64)..=(v_hi.floor().min(2.0 * n as f64) as i64)
            {
                let pv = binom_pmf(2 * n as u64, p, v as u64);
                if pv == 0.0 {
                    continue;
                }
                v_cov += pv;
                let (u_lo, u_hi) = ts.u_window(&VKey::Scalar(v));
                let mut u_cov = 0.0;
                for u in (u_lo.ceil().max(0.0) as i64)..=(u_hi.floor().min(v as f64) as i64) {
                    u_cov += binom_pmf(v as u64, pb, u as u64);
                }
                min_u_cov = min_u_cov.min(u_cov);
                joint += pv * u_cov;
            }
            Some(IidCoverageExact {
                v_coverage: v_cov,
                v_floor: 1.0 - p * (1.0 - p),
                min_u_coverage: min_u_cov,
                u_floor: 1.0 - pb * (1.0 - pb),
                joint,
            })
        }
        Model::Block { .. } => None,
    };
    Ok(CoverageReport {
        empirical: EstimateReport {
            name: "coverage".into(),
            point: frac,
            half_width: hw,
            samples,
            seed,
            params_fingerprint: fp,
        },
        exact,
        c,
        n,
    })
}

/// Pilot choice of the window constant: the empirical `target`-quantile of
/// the max standardised deviation of the statistics, so a fresh run covers
/// roughly `target` of the mass.
pub fn pilot_c(
    model: &Model,
    n: usize,
    target: f64,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if !(0.0 < target && target < 1.0) {
        return Err(Error::Validation(format!(
            "target coverage must lie in (0, 1), got {target}"
        )));
    }
    if samples == 0 {
        return Err(Error::Validation("need at least 1 sample".into()));
    }
    let mut devs = par_fold(
        samples,
        Vec::new,
        |acc, i| {
            let mut rng = RandomStream::substream(seed, i);
            let key = model.sample_uv(n, &mut rng);
            acc.push(standardised_deviation(model, n, &key));
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    devs.sort_by(f64::total_cmp);
    Ok(quantile(&devs, target))
}

/// Max standardised deviation of the statistics from their window centres,
/// in units of the window scaling.
fn standardised_deviation(model: &Model, n: usize, key: &UvKey) -> f64 {
    match (model, key.v) {
        (Model::Iid { dist, a, b, .. }, VKey::Scalar(v)) => {
            let p = dist.prob(*a) + dist.prob(*b);
            let pb = dist.prob(*b) / p;
            let dv = (v as f64 - 2.0 * n as f64 * p).abs() / (2.0 * n as f64).sqrt();
            let du = (key.u as f64 - v as f64 * pb).abs() / (v.max(1) as f64).sqrt();
            dv.max(du)
        }
        (Model::Block { params }, VKey::TR { t, .. }) => {
            let mu = params.mu();
            let [q1, q2, q3] = params.q();
            let dt = (t as f64 - n as f64 / mu).abs() / (n as f64).sqrt();
            let u_center = n as f64 / mu * (q2 - q1 - q3);
            let du = (key.u as f64 - u_center).abs() / (n as f64).sqrt();
            dt.max(du)
        }
        _ => unreachable!("model and key kinds always agree"),
    }
}

/// The exact minimum of `n P(U = u, V = v)` over the typical windows.
#[derive(Debug, Clone, Serialize)]
pub struct FloorReport {
    pub n_times_min_pmf: f64,
    pub min_pmf: f64,
    pub at: Option<UvKey>,
    pub points: usize,
    pub c: f64,
    pub n: usize,
    pub params_fingerprint: String,
}

pub fn pointmass_floor(model: &Model, n: usize, c: f64) -> Result<FloorReport> {
    if !(c > 0.0) {
        return Err(Error::Validation(format!("c must be > 0, got {c}")));
    }
    let fp = fingerprint(&("floor", model, n, c));
    let ts = model.typical_sets(n, c);
    let mut min_pmf = f64::INFINITY;
    let mut at = None;
    let mut points = 0usize;
    let vkeys: Vec<VKey> = match model {
        Model::Iid { .. } => {
            let (v_lo, v_hi) = ts.v_window();
            ((v_lo.ceil().max(0.0) as i64)..=(v_hi.floor().min(2.0 * n as f64) as i64))
                .map(VKey::Scalar)
                .collect()
        }
        Model::Block { params } => {
            let (t_lo, t_hi) = ts.v_window();
            let mut keys = Vec::new();
            for t in (t_lo.ceil().max(0.0) as i64)..=(t_hi.floor() as i64) {
                for r in 1..=(params.l() as i64 + 1) {
                    keys.push(VKey::TR { t, r });
                }
            }
            keys
        }
    };
    for v in vkeys {
        for u in model.fiber(n, v) {
            let key = UvKey { u, v };
            if !ts.u_contains(&key) {
                continue;
            }
            let pmf = model.uv_pmf(n, key);
            if pmf > 0.0 {
                points += 1;
                if pmf < min_pmf {
                    min_pmf = pmf;
                    at = Some(key);
                }
            }
        }
    }
    if points == 0 {
        return Err(Error::EmptyFiber(
            "no feasible point inside the typical windows".into(),
        ));
    }
    Ok(FloorReport {
        n_times_min_pmf: n as f64 * min_pmf,
        min_pmf,
        at,
        points,
        c,
        n,
        params_fingerprint: fp,
    })
}

/// Chebyshev tail bound `P(|U - EU| >= zeta sigma) <= 1 / zeta^2`.
pub fn chebyshev_bound(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::Validation(format!("zeta must be > 0, got {zeta}")));
    }
    Ok(1.0 / (zeta * zeta))
}

/// Hoeffding bound `2 exp(-Delta^2 n / (2 a^2))` for means of i.i.d.
/// variables with `|V - EV| <= a`.
pub fn hoeffding_bound(delta: f64, a: f64, n: u64) -> Result<f64> {
    if !(delta > 0.0) || !(a > 0.0) {
        return Err(Error::Validation(format!(
            "need delta > 0 and a > 0, got delta = {delta}, a = {a}"
        )));
    }
    Ok(2.0 * (-delta * delta * n as f64 / (2.0 * a * a)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BlockModelParams;
    use crate::oracle;
    use crate::seq::{Alphabet, SymbolDist};
    use approx::assert_relative_eq;

    fn block3() -> Model {
        Model::block(BlockModelParams::equiprobable(3).unwrap())
    }

    fn iid3() -> Model {
        let al = Alphabet::from_chars("ab*").unwrap();
        let d = SymbolDist::new(vec![0.25, 0.25, 0.5]).unwrap();
        Model::iid(al, d, 0, 1).unwrap()
    }

    #[test]
    fn mc_moments_agree_with_exact_enumeration() {
        let m = iid3();
        let scheme = ScoringScheme::lcs(3).unwrap();
        let (exact_mean, exact_var) = oracle::exact_moments(&m, 4, &scheme).unwrap();
        let mc = mc_moments(&m, 4, &scheme, 40_000, 123).unwrap();
        assert!(
            (mc.mean.point - exact_mean).abs() <= mc.mean.half_width * 1.5,
            "mean {} vs exact {exact_mean} (hw {})",
            mc.mean.point,
            mc.mean.half_width
        );
        assert!(
            (mc.variance.point - exact_var).abs() <= mc.variance.half_width * 1.5,
            "var {} vs exact {exact_var} (hw {})",
            mc.variance.point,
            mc.variance.half_width
        );
    }

    #[test]
    fn reports_are_bit_identical_across_runs() {
        let m = block3();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let a = mc_moments(&m, 60, &scheme, 500, 7).unwrap();
        let b = mc_moments(&m, 60, &scheme, 500, 7).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn degenerate_scheme_has_zero_variance() {
        // S == 0 forces L == 0 (delta must be <= a_max = 0)
        let scheme = ScoringScheme::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], 0.0).unwrap();
        let m = block3();
        let scan = variance_scan(&m, &scheme, &[20, 40], 200, 3).unwrap();
        for row in &scan.rows {
            assert_eq!(row.var_hat, 0.0);
        }
    }

    #[test]
    fn scan_validates_n_list() {
        let m = block3();
        let scheme = ScoringScheme::lcs(2).unwrap();
        assert!(variance_scan(&m, &scheme, &[40, 20], 100, 1).is_err());
        assert!(variance_scan(&m, &scheme, &[], 100, 1).is_err());
    }

    #[test]
    fn a2_never_sees_gains_below_the_bound() {
        let m = block3();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let t = m.transform();
        let rep = verify_a2(&m, 30, &t, &scheme, 2_000, 11).unwrap();
        assert!(rep.min_gain >= -1.0);
        assert_eq!(rep.bound, -1.0);
        assert!(rep.applicable > 0);
    }

    #[test]
    fn a1_flags_fully_inapplicable_inputs() {
        // at n = 0 there are no letters to swap
        let m = iid3();
        let scheme = ScoringScheme::lcs(3).unwrap();
        let t = m.transform();
        let rep = verify_a1(&m, 0, &t, &scheme, None, 50, 1).unwrap();
        assert_eq!(rep.inapplicable, 50);
        assert_eq!(rep.frac_ge_eps0.point, 0.0);
    }

    #[test]
    fn a1_gains_sit_mostly_above_zero_for_the_block_model() {
        let m = block3();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let t = m.transform();
        let rep = verify_a1(&m, 120, &t, &scheme, None, 400, 5).unwrap();
        assert_eq!(rep.inapplicable, 0);
        assert!(rep.mean_gain > 0.0, "mean gain {}", rep.mean_gain);
        assert!(rep.frac_ge_eps0.point >= 0.98);
    }

    #[test]
    fn profile_matches_oracle_at_n4() {
        let m = iid3();
        let scheme = ScoringScheme::lcs(3).unwrap();
        let exact = oracle::exact_conditional_means(&m, 4, &scheme).unwrap();
        let prof = conditional_profile(&m, 4, &scheme, 200_000, 99, 1e9).unwrap();
        let mut checked = 0;
        for bin in &prof.bins {
            if bin.count < 1000 {
                continue;
            }
            let key = UvKey { u: bin.u, v: bin.v };
            let l_exact = exact[&key];
            let se = (bin.var / bin.count as f64).sqrt();
            assert!(
                (bin.mean - l_exact).abs() <= 5.0 * se + 1e-9,
                "{key}: binned {} vs exact {l_exact} (se {se})",
                bin.mean
            );
            checked += 1;
        }
        assert!(checked > 5);
    }

    #[test]
    fn iid_conditional_variance_is_exact_and_linear() {
        let m = iid3();
        let mut ratios = Vec::new();
        for n in [100usize, 1_000, 10_000] {
            let rep = conditional_variance(&m, n, 1.0, 0, 0).unwrap();
            assert!(rep.exact);
            assert!(rep.min_ratio > 0.0);
            ratios.push(rep.min_ratio);
        }
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 3.0, "conditional variance ratios drift: {ratios:?}");
    }

    #[test]
    fn zero_width_window_has_zero_variance() {
        let m = iid3();
        let ts = m.typical_sets(100, 1e-9);
        // a window this narrow holds at most one fiber point
        let (var, _) = truncated_u_variance(&m, 100, &ts, VKey::Scalar(100));
        assert!(var == 0.0 || var.is_nan());
    }

    #[test]
    fn coverage_tends_to_one_as_c_grows() {
        let m = block3();
        let rep = coverage_check(&m, 200, 50.0, 2_000, 21).unwrap();
        assert_eq!(rep.empirical.point, 1.0);
    }

    #[test]
    fn iid_coverage_floors_hold_exactly() {
        let m = iid3();
        let rep = coverage_check(&m, 800, 1.0, 3_000, 13).unwrap();
        let exact = rep.exact.expect("iid model carries exact coverage");
        assert!(exact.v_coverage >= exact.v_floor);
        assert!(exact.min_u_coverage >= exact.u_floor);
        // empirical and exact joint coverage agree within the CI
        assert!(
            (rep.empirical.point - exact.joint).abs() <= rep.empirical.half_width * 1.5,
            "empirical {} vs exact {}",
            rep.empirical.point,
            exact.joint
        );
    }

    #[test]
    fn pilot_c_hits_the_target_coverage() {
        let m = block3();
        let c = pilot_c(&m, 400, 0.95, 4_000, 31).unwrap();
        assert!(c > 0.0);
        let rep = coverage_check(&m, 400, c, 4_000, 32).unwrap();
        assert!(
            rep.empirical.point > 0.88,
            "pilot c = {c} gave coverage {}",
            rep.empirical.point
        );
    }

    #[test]
    fn floor_is_stable_across_n_for_the_iid_model() {
        let m = iid3();
        let mut values = Vec::new();
        for n in [100usize, 1_000, 10_000] {
            let rep = pointmass_floor(&m, n, 1.0).unwrap();
            assert!(rep.n_times_min_pmf > 0.0);
            values.push(rep.n_times_min_pmf);
        }
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 5.0, "floor drifted: {values:?}");
    }

    #[test]
    fn tail_bound_arithmetic() {
        assert_relative_eq!(chebyshev_bound(2.0).unwrap(), 0.25);
        assert_relative_eq!(
            hoeffding_bound(1.0, 1.0, 8).unwrap(),
            2.0 * (-4.0f64).exp()
        );
        assert!(chebyshev_bound(0.0).is_err());
        assert!(hoeffding_bound(-1.0, 1.0, 8).is_err());
        assert!(hoeffding_bound(1.0, 0.0, 8).is_err());
    }

    #[test]
    fn gamma_hat_stabilises_with_n() {
        // |gamma(2n) - gamma(n)| shrinks across the ladder
        let al = Alphabet::binary();
        let d = SymbolDist::new(vec![0.5, 0.5]).unwrap();
        let m = Model::iid(al, d, 0, 1).unwrap();
        let scheme = ScoringScheme::lcs(2).unwrap();
        let mut gammas = Vec::new();
        for n in [128usize, 256, 512, 1024] {
            let mc = mc_moments(&m, n, &scheme, 2_000, 77).unwrap();
            gammas.push(mc.gamma.point);
        }
        let first_diff = (gammas[1] - gammas[0]).abs();
        let last_diff = (gammas[3] - gammas[2]).abs();
        assert!(
            last_diff < first_diff,
            "gamma ladder did not tighten: {gammas:?}"
        );
    }
}
