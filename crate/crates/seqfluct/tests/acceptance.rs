//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Criterion 2 pins the published worked scores of two fixed string pairs.
//! Those scores are provably one below the true optimum (explicit witness
//! subsequences are embedded below), so that test documents the discrepancy
//! and is expected to stay red; every derived fact that does not depend on
//! the miscounted absolute scores is asserted and passes.

use std::sync::Arc;
use std::time::Instant;

use seqfluct::cli::{self, CommandSpec, RunConfig};
use seqfluct::estimators::{self, BIN_HIT_THRESHOLD};
use seqfluct::models::{
    block_stats, fiber_block, tur_pmf, tur_to_blocks, uv_from_blocks, BlockModelParams,
};
use seqfluct::oracle;
use seqfluct::{
    brute_force_score, lcs_length, optimal_score, pair_score, Alphabet, Model, RandomStream,
    ScoringScheme, Sequence, SequencePair, SymbolDist, Transform, UvKey, VKey,
};

fn binary_schemes() -> Vec<ScoringScheme> {
    vec![
        ScoringScheme::lcs(2).unwrap(),
        ScoringScheme::new(vec![vec![2.0, 1.0], vec![0.5, 3.0]], -1.0).unwrap(),
        ScoringScheme::new(vec![vec![2.0, 1.0], vec![0.5, 3.0]], 0.5).unwrap(),
    ]
}

fn ternary_scheme() -> ScoringScheme {
    ScoringScheme::new(
        vec![
            vec![2.0, 0.5, 0.0],
            vec![0.5, 1.5, 1.0],
            vec![0.0, 1.0, 3.0],
        ],
        0.5,
    )
    .unwrap()
}

fn block3() -> Model {
    Model::block(BlockModelParams::equiprobable(3).unwrap())
}

fn iid3_uniform() -> Model {
    let al = Alphabet::from_chars("abc").unwrap();
    Model::iid(al, SymbolDist::uniform(3).unwrap(), 0, 1).unwrap()
}

fn iid3_quarter() -> Model {
    let al = Alphabet::from_chars("ab*").unwrap();
    let d = SymbolDist::new(vec![0.25, 0.25, 0.5]).unwrap();
    Model::iid(al, d, 0, 1).unwrap()
}

fn seq_of(al: &Arc<Alphabet>, bits: u32, n: usize) -> Sequence {
    Sequence::from_indices(
        Arc::clone(al),
        (0..n).map(|i| (bits >> i & 1) as u8).collect(),
    )
    .unwrap()
}

#[test]
fn acceptance_01_alignment_oracle_equivalence() {
    let started = Instant::now();
    let al = Alphabet::binary();
    let schemes = binary_schemes();
    let mut mismatches = 0u64;
    for n in 0..=5usize {
        for xs in 0..(1u32 << n) {
            for ys in 0..(1u32 << n) {
                let x = seq_of(&al, xs, n);
                let y = seq_of(&al, ys, n);
                for scheme in &schemes {
                    let fast = optimal_score(&x, &y, scheme).unwrap().value;
                    let slow = brute_force_score(&x, &y, scheme).unwrap().value;
                    if (fast - slow).abs() > 1e-9 {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let al3 = Alphabet::from_chars("abc").unwrap();
    let scheme3 = ternary_scheme();
    let mut rng = RandomStream::root(1001);
    for _ in 0..1_000 {
        let n = 8;
        let x = Sequence::from_indices(
            Arc::clone(&al3),
            (0..n).map(|_| rng.below(3) as u8).collect(),
        )
        .unwrap();
        let y = Sequence::from_indices(
            Arc::clone(&al3),
            (0..n).map(|_| rng.below(3) as u8).collect(),
        )
        .unwrap();
        let fast = optimal_score(&x, &y, &scheme3).unwrap().value;
        let slow = brute_force_score(&x, &y, &scheme3).unwrap().value;
        if (fast - slow).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 1 {}: {} mismatches, {:.1} s (budget 60 s)",
        if mismatches == 0 && elapsed < 60.0 { "PASS" } else { "FAIL" },
        mismatches,
        elapsed
    );
    assert_eq!(mismatches, 0);
    assert!(elapsed < 60.0);
}

#[test]
fn acceptance_02_worked_examples() {
    let al = Alphabet::binary();
    let lcs2 = ScoringScheme::lcs(2).unwrap();
    let mut failures: Vec<String> = Vec::new();

    // fixed pair, stated optimum 10
    let x = al.parse("100101100001101").unwrap();
    let y = al.parse("111000010101110").unwrap();
    let l15 = lcs_length(&x, &y).unwrap();
    if l15 != 10 {
        failures.push(format!(
            "stated L_15 = 10 is not attainable: the optimum of this pair is {l15} \
             (witness common subsequence: 11100001101)"
        ));
    }

    // block statistics of the worked block sequence
    let bx = al.parse("0011100111100").unwrap();
    let stats = block_stats(&bx, 3).unwrap();
    let (t, u, r) = uv_from_blocks(&stats, 13, 3).unwrap();
    if (stats.b1, stats.b2, stats.b3, stats.r) != (2, 1, 1, 2) {
        failures.push(format!("block stats {stats:?} differ from (2, 1, 1, r=2)"));
    }
    assert_eq!((t, u, r), (4, -2, 2));

    // block transformation output on the same sequence
    let z = SequencePair::new(bx.clone(), bx.clone()).unwrap();
    let outcomes = Transform::BlockTransform { l: 3 }.outcomes(&z).unwrap();
    if !outcomes
        .items
        .iter()
        .any(|(p, _)| p.x.to_string() == "0001110011100")
    {
        failures.push("transformation never produced 0001110011100".into());
    }

    // l = 2 pair: stated base 10 and post-transformation 9; min gain -1
    let x2 = al.parse("11100010101101").unwrap();
    let y2 = al.parse("11101100101000").unwrap();
    let z2 = SequencePair::new(x2, y2).unwrap();
    let base = pair_score(&z2, &lcs2).unwrap();
    let outs = Transform::BlockTransform { l: 2 }.outcomes(&z2).unwrap();
    let mut min_gain = f64::INFINITY;
    let mut nine_achieved = false;
    for (zt, _) in &outs.items {
        let s = pair_score(zt, &lcs2).unwrap();
        min_gain = min_gain.min(s - base);
        if s == 9.0 {
            nine_achieved = true;
        }
    }
    if min_gain != -1.0 {
        failures.push(format!("min single-application gain {min_gain} != -1"));
    }
    if !nine_achieved {
        failures.push(format!(
            "stated post-transformation score 9 is not attainable: the pair scores {base} \
             (witness common subsequence: 11100010100), so the worst outcome scores {}",
            base + min_gain
        ));
    }

    let pass = failures.is_empty();
    println!(
        "ACCEPTANCE 2 {}: worked examples{}",
        if pass { "PASS" } else { "FAIL" },
        if pass {
            " reproduced".to_string()
        } else {
            format!(" — {}", failures.join("; "))
        }
    );
    assert!(pass, "{}", failures.join("\n"));
}

#[test]
fn acceptance_03_pushforward_lemmas() {
    let started = Instant::now();
    // letter swap at combined length 6 over a three-letter alphabet
    let m = iid3_uniform();
    let t = m.transform();
    let mut max_tv: f64 = 0.0;
    let mut fibers = 0;
    for at in oracle::uv_support(&m, 3).unwrap() {
        let VKey::Scalar(v) = at.v else { unreachable!() };
        if v <= at.u {
            continue;
        }
        let push = oracle::pushforward(&m, 3, at, &t).unwrap();
        let target = oracle::conditional_law(&m, 3, at.shifted(1)).unwrap();
        max_tv = max_tv.max(oracle::tv_distance(&push, &target));
        fibers += 1;
    }
    assert!(fibers > 10);

    // block transformation at n = 13, l = 3
    let mb = block3();
    let tb = mb.transform();
    let mut fibers_b = 0;
    for at in oracle::uv_support(&mb, 13).unwrap() {
        let VKey::TR { t: tt, r } = at.v else { unreachable!() };
        let stats = tur_to_blocks(tt, at.u, r, 13, 3).unwrap();
        if stats.b1 < 1 || stats.b3 < 1 {
            continue;
        }
        let push = oracle::pushforward(&mb, 13, at, &tb).unwrap();
        let target = oracle::conditional_law(&mb, 13, at.shifted(4)).unwrap();
        max_tv = max_tv.max(oracle::tv_distance(&push, &target));
        fibers_b += 1;
    }
    assert!(fibers_b > 5);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = max_tv <= 1e-10 && elapsed < 300.0;
    println!(
        "ACCEPTANCE 3 {}: max TV = {max_tv:.3e} over {} swap + {} block fibers, {:.1} s (budget 300 s)",
        if pass { "PASS" } else { "FAIL" },
        fibers,
        fibers_b,
        elapsed
    );
    assert!(max_tv <= 1e-10);
    assert!(elapsed < 300.0);
}

#[test]
fn acceptance_04_a2_hard_bound() {
    let samples = 100_000u64;
    let mb = block3();
    let lcs2 = ScoringScheme::lcs(2).unwrap();
    let rep_b = estimators::verify_a2(&mb, 40, &mb.transform(), &lcs2, samples, 42).unwrap();

    let mi = iid3_uniform();
    let scheme3 = ternary_scheme();
    let rep_i = estimators::verify_a2(&mi, 30, &mi.transform(), &scheme3, samples, 43).unwrap();

    println!(
        "ACCEPTANCE 4 PASS: block min gain {} >= -1; swap min gain {} >= {}",
        rep_b.min_gain, rep_i.min_gain, rep_i.bound
    );
    assert!(rep_b.min_gain >= -1.0);
    assert!(rep_i.min_gain >= -scheme3.a_max());
    assert_eq!(rep_b.samples, samples);
}

#[test]
fn acceptance_05_quotient_identity_and_fibers() {
    // exact pmf ratio against the closed form on random feasible points
    let mut rng = RandomStream::root(55);
    let mut checked = 0;
    let mut max_rel: f64 = 0.0;
    while checked < 1_000 {
        let l = 2 + rng.below(3);
        let q1 = 0.1 + 0.5 * rng.uniform();
        let q3 = 0.1 + (0.85 - q1 - 0.1) * rng.uniform();
        let q2 = 1.0 - q1 - q3;
        let params = match BlockModelParams::new(l, q1, q2, q3) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let n = 20 + rng.below(81);
        let mut stream = RandomStream::substream(56, checked as u64);
        let x = seqfluct::models::sample_block(n, &params, &mut stream);
        let stats = block_stats(&x, l).unwrap();
        if stats.b1 < 1 || stats.b3 < 1 {
            continue;
        }
        let (t, u, r) = uv_from_blocks(&stats, n, l).unwrap();
        let p0 = tur_pmf(t, u, r, &params, n);
        let p1 = tur_pmf(t, u + 4, r, &params, n);
        assert!(p0 > 0.0 && p1 > 0.0);
        let closed = (stats.b1 * stats.b3) as f64
            / ((stats.b2 + 1) * (stats.b2 + 2)) as f64
            * q2 * q2
            / (q1 * q3);
        let rel = ((p1 / p0) - closed).abs() / closed;
        max_rel = max_rel.max(rel);
        checked += 1;
    }

    // every enumerated block fiber is a span-4 lattice
    let mut span_ok = true;
    for n in [10usize, 20, 30, 40] {
        for t in 0..=(n as i64) {
            for r in 1..=4i64 {
                let fiber = fiber_block(t, r, n, 3);
                if fiber.windows(2).any(|w| w[1] - w[0] != 4) {
                    span_ok = false;
                }
            }
        }
    }

    // i.i.d. fibers are the full integer range
    let mi = iid3_quarter();
    let mut iid_ok = true;
    for v in 0..=16i64 {
        if mi.fiber(8, VKey::Scalar(v)) != (0..=v).collect::<Vec<_>>() {
            iid_ok = false;
        }
    }
    // cross-check against the enumerated support at a small n
    for at in oracle::uv_support(&mi, 3).unwrap() {
        if !mi.fiber(3, at.v).contains(&at.u) {
            iid_ok = false;
        }
    }

    let pass = max_rel <= 1e-12 && span_ok && iid_ok;
    println!(
        "ACCEPTANCE 5 {}: max ratio deviation {max_rel:.3e} over 1000 points; spans {}; iid fibers {}",
        if pass { "PASS" } else { "FAIL" },
        span_ok,
        iid_ok
    );
    assert!(max_rel <= 1e-12);
    assert!(span_ok && iid_ok);
}

#[test]
fn acceptance_06_variance_linearity() {
    let started = Instant::now();
    let m = block3();
    let scheme = ScoringScheme::lcs(2).unwrap();
    let scan =
        estimators::variance_scan(&m, &scheme, &[200, 400, 800, 1600], 20_000, 600).unwrap();
    let spread = scan.ratio_max / scan.ratio_min;
    let cis_exclude_zero = scan.rows.iter().all(|r| r.var_hat - r.ci95 > 0.0);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = spread <= 3.0 && scan.ratio_min > 0.0 && cis_exclude_zero && elapsed < 1800.0;
    for row in &scan.rows {
        println!(
            "  n = {:>5}: Var = {:.3} +- {:.3}, Var/n = {:.5}",
            row.n, row.var_hat, row.ci95, row.ratio
        );
    }
    println!(
        "ACCEPTANCE 6 {}: Var/n in [{:.5}, {:.5}] (spread {:.3} <= 3), {:.1} s (budget 1800 s)",
        if pass { "PASS" } else { "FAIL" },
        scan.ratio_min,
        scan.ratio_max,
        spread,
        elapsed
    );
    assert!(scan.ratio_min > 0.0);
    assert!(spread <= 3.0);
    assert!(cis_exclude_zero);
    assert!(elapsed < 1800.0);
}

#[test]
fn acceptance_07_typical_set_coverage() {
    // block model at n = 10^4 with a pilot-chosen c
    let m = block3();
    let n = 10_000;
    let c = estimators::pilot_c(&m, n, 0.95, 4_000, 700).unwrap();
    let rep = estimators::coverage_check(&m, n, c, 20_000, 701).unwrap();
    let block_ok = rep.empirical.point + rep.empirical.half_width >= 0.9;

    // i.i.d. model: exact binomial tails against the Chebyshev floors
    let mi = iid3_quarter();
    let repi = estimators::coverage_check(&mi, 10_000, 1.0, 10_000, 702).unwrap();
    let exact = repi.exact.expect("iid coverage is exact");
    let iid_ok = exact.v_coverage >= exact.v_floor && exact.min_u_coverage >= exact.u_floor;

    let pass = block_ok && iid_ok;
    println!(
        "ACCEPTANCE 7 {}: block coverage {:.4} +- {:.4} (c = {c:.3}); iid exact V {:.4} >= {:.4}, U {:.4} >= {:.4}",
        if pass { "PASS" } else { "FAIL" },
        rep.empirical.point,
        rep.empirical.half_width,
        exact.v_coverage,
        exact.v_floor,
        exact.min_u_coverage,
        exact.u_floor
    );
    assert!(block_ok, "block coverage {:?}", rep.empirical);
    assert!(iid_ok, "iid floors {exact:?}");
}

#[test]
fn acceptance_08_pointmass_floor_stability() {
    let mut all_pass = true;
    for (model, c, label) in [
        (iid3_quarter(), 1.0, "iid"),
        (block3(), 0.3, "block"),
    ] {
        let mut values = Vec::new();
        for n in [100usize, 1_000, 10_000, 100_000] {
            let rep = estimators::pointmass_floor(&model, n, c).unwrap();
            assert!(rep.n_times_min_pmf > 0.0);
            values.push(rep.n_times_min_pmf);
        }
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max / min;
        println!("  {label}: n * min pmf = {values:?} (spread {spread:.3})");
        if spread >= 5.0 {
            all_pass = false;
        }
    }
    println!(
        "ACCEPTANCE 8 {}: point-mass floors vary by < 5x across n = 10^2..10^5",
        if all_pass { "PASS" } else { "FAIL" }
    );
    assert!(all_pass);
}

#[test]
fn acceptance_09_condition1_monotonicity() {
    // exact conditional means at n = 4 against binned estimates
    let m = iid3_uniform();
    let scheme = ternary_scheme();
    let exact = oracle::exact_conditional_means(&m, 4, &scheme).unwrap();
    let prof = estimators::conditional_profile(&m, 4, &scheme, 200_000, 900, 1e9).unwrap();
    let mut checked = 0;
    for gap in &prof.gaps {
        let lo = UvKey { u: gap.u, v: gap.v };
        let hi = UvKey {
            u: gap.u + 1,
            v: gap.v,
        };
        let exact_gap = exact[&hi] - exact[&lo];
        assert!(
            (gap.gap - exact_gap).abs() <= 4.0 * gap.se + 1e-9,
            "{lo}: binned gap {} vs exact {exact_gap} (se {})",
            gap.gap,
            gap.se
        );
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} gaps had enough hits");

    // block model at n = 500: positive gaps on the typical fibers
    let mb = block3();
    let lcs2 = ScoringScheme::lcs(2).unwrap();
    let prof_b =
        estimators::conditional_profile(&mb, 500, &lcs2, 2_000_000, 901, 0.3).unwrap();
    let pass = prof_b.frac_positive >= 0.9
        && prof_b.delta_hat - 1.96 * prof_b.delta_hat_se > 0.0;
    println!(
        "ACCEPTANCE 9 {}: {} exact-vs-binned gaps agree at n = 4; n = 500 block: {} gaps, {:.1}% positive, delta_hat = {:.4} +- {:.4} (min raw gap {:.4})",
        if pass { "PASS" } else { "FAIL" },
        checked,
        prof_b.gaps.len(),
        100.0 * prof_b.frac_positive,
        prof_b.delta_hat,
        1.96 * prof_b.delta_hat_se,
        prof_b.min_gap
    );
    assert!(!prof_b.gaps.is_empty());
    assert!(
        prof_b.frac_positive >= 0.9,
        "only {:.1}% of gaps positive",
        100.0 * prof_b.frac_positive
    );
    assert!(
        prof_b.delta_hat - 1.96 * prof_b.delta_hat_se > 0.0,
        "delta_hat = {} +- {}",
        prof_b.delta_hat,
        1.96 * prof_b.delta_hat_se
    );
}

#[test]
fn acceptance_10_property_suites() {
    // monotone-increment variance bound on 1000 random laws
    let mut rng = RandomStream::root(1000);
    for case in 0..1_000 {
        let len = 2 + rng.below(10);
        let start = rng.below(40) as i64 - 20;
        let c = 0.1 + 1.9 * rng.uniform();
        let probs: Vec<f64> = {
            let raw: Vec<f64> = (0..len).map(|_| 0.05 + rng.uniform()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        };
        let mut f = vec![0.0];
        for _ in 1..len {
            f.push(f.last().unwrap() + c + 2.0 * rng.uniform());
        }
        let mean_n: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| (start + i as i64) as f64 * p)
            .sum();
        let var_n: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| ((start + i as i64) as f64 - mean_n).powi(2) * p)
            .sum();
        let mean_f: f64 = f.iter().zip(&probs).map(|(v, p)| v * p).sum();
        let var_f: f64 = f
            .iter()
            .zip(&probs)
            .map(|(v, p)| (v - mean_f).powi(2) * p)
            .sum();
        assert!(
            var_f >= c * c * var_n - 1e-9 * (1.0 + var_f),
            "case {case}: Var[f(N)] = {var_f} < c^2 Var[N] = {}",
            c * c * var_n
        );
    }

    // lattice version with span k0 on 1000 random laws
    for case in 0..1_000 {
        let len = 2 + rng.below(10);
        let start = rng.below(60) as i64 - 30;
        let delta = 0.1 + 1.9 * rng.uniform();
        let mut values = vec![start];
        let mut k0 = 1i64;
        for _ in 1..len {
            let gap = 1 + rng.below(4) as i64;
            k0 = k0.max(gap);
            values.push(values.last().unwrap() + gap);
        }
        let probs: Vec<f64> = {
            let raw: Vec<f64> = (0..len).map(|_| 0.05 + rng.uniform()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        };
        let mut f = vec![0.0];
        for _ in 1..len {
            f.push(f.last().unwrap() + delta + 2.0 * rng.uniform());
        }
        let mean_n: f64 = values
            .iter()
            .zip(&probs)
            .map(|(&v, p)| v as f64 * p)
            .sum();
        let var_n: f64 = values
            .iter()
            .zip(&probs)
            .map(|(&v, p)| (v as f64 - mean_n).powi(2) * p)
            .sum();
        let mean_f: f64 = f.iter().zip(&probs).map(|(v, p)| v * p).sum();
        let var_f: f64 = f
            .iter()
            .zip(&probs)
            .map(|(v, p)| (v - mean_f).powi(2) * p)
            .sum();
        let bound = (delta / k0 as f64).powi(2) * var_n;
        assert!(
            var_f >= bound - 1e-9 * (1.0 + var_f),
            "case {case}: Var[f(N)] = {var_f} < (delta/k0)^2 Var[N] = {bound}"
        );
    }

    // exact conditional-variance decomposition at n <= 4, both models
    let lcs2 = ScoringScheme::lcs(2).unwrap();
    for (model, n, scheme) in [
        (block3(), 4usize, lcs2.clone()),
        (iid3_uniform(), 4usize, ternary_scheme()),
    ] {
        let d = oracle::variance_decomposition(&model, n, &scheme).unwrap();
        let dev =
            (d.var_total - (d.mean_cond_var + d.var_cond_mean)).abs() / d.var_total.max(1.0);
        assert!(dev <= 1e-9, "decomposition deviates by {dev}");
    }

    // empirical tails never exceed the Chebyshev / Hoeffding bounds
    let trials = 100_000usize;
    let m = 400usize;
    let mut sums = Vec::with_capacity(trials);
    let mut rng2 = RandomStream::root(1010);
    for _ in 0..trials {
        let mut s = 0i64;
        for _ in 0..m {
            s += 2 + rng2.below(3) as i64; // block length uniform on {2, 3, 4}
        }
        sums.push(s);
    }
    let mu = 3.0 * m as f64;
    let sigma = (m as f64 * (2.0 / 3.0)).sqrt();
    for zeta in [1.5f64, 2.0, 3.0] {
        let tail = sums
            .iter()
            .filter(|&&s| (s as f64 - mu).abs() >= zeta * sigma)
            .count() as f64
            / trials as f64;
        let bound = estimators::chebyshev_bound(zeta).unwrap();
        assert!(tail <= bound, "Chebyshev violated: {tail} > {bound} at zeta = {zeta}");
    }
    for delta in [0.15f64, 0.2, 0.3] {
        let tail = sums
            .iter()
            .filter(|&&s| (s as f64 / m as f64 - 3.0).abs() >= delta)
            .count() as f64
            / trials as f64;
        let bound = estimators::hoeffding_bound(delta, 2.0, m as u64).unwrap();
        assert!(tail <= bound, "Hoeffding violated: {tail} > {bound} at delta = {delta}");
    }

    println!("ACCEPTANCE 10 PASS: 2000 variance-bound instances, exact decomposition, tail bounds respected");
    let _ = BIN_HIT_THRESHOLD;
}

#[test]
fn acceptance_11_determinism_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |workers: usize, tag: &str| -> (String, String) {
        let out = dir.path().join(format!("scan_{tag}"));
        let config = RunConfig {
            command: CommandSpec::VarianceScan {
                n_list: vec![50, 100],
                samples: 3_000,
            },
            model: Some(block3()),
            scheme: ScoringScheme::lcs(2).unwrap(),
            alphabet: Alphabet::binary(),
            seed: 11_000,
            workers,
            out: Some(out.clone()),
        };
        cli::run(&config).unwrap();
        (
            std::fs::read_to_string(format!("{}.csv", out.display())).unwrap(),
            std::fs::read_to_string(format!("{}.json", out.display())).unwrap(),
        )
    };
    let (csv1, json1) = run_once(1, "w1");
    let (csv4, json4) = run_once(4, "w4");
    let (csv1b, json1b) = run_once(1, "w1b");
    let pass = csv1 == csv4 && json1 == json4 && csv1 == csv1b && json1 == json1b;
    println!(
        "ACCEPTANCE 11 {}: byte-identical CSV/JSON across worker counts and reruns",
        if pass { "PASS" } else { "FAIL" }
    );
    assert_eq!(csv1, csv4);
    assert_eq!(json1, json4);
    assert_eq!(csv1, csv1b);
    assert_eq!(json1, json1b);
}
