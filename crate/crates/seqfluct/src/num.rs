//! Small numeric helpers shared by the model pmfs and estimators.

use statrs::function::factorial::ln_factorial;

/// Direct-product paths are used up to this trial count; beyond it,
/// coefficients go through `ln_factorial` to avoid overflow/underflow.
pub(crate) const DIRECT_PMF_MAX: u64 = 300;

/// Binomial coefficient as an `f64` via a stable multiplicative product.
pub(crate) fn binom_coeff(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0_f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Multinomial coefficient `(sum parts)! / prod parts!`.
pub(crate) fn multinomial_coeff(parts: &[u64]) -> f64 {
    let total: u64 = parts.iter().sum();
    if total <= DIRECT_PMF_MAX {
        let mut rest = total;
        let mut r = 1.0_f64;
        for &p in parts {
            r *= binom_coeff(rest, p);
            rest -= p;
        }
        r
    } else {
        ln_multinomial_coeff(parts).exp()
    }
}

pub(crate) fn ln_multinomial_coeff(parts: &[u64]) -> f64 {
    let total: u64 = parts.iter().sum();
    ln_factorial(total) - parts.iter().map(|&p| ln_factorial(p)).sum::<f64>()
}

/// Binomial pmf `P(X = k)` for `X ~ B(m, p)`, stable for large `m`.
pub(crate) fn binom_pmf(m: u64, p: f64, k: u64) -> f64 {
    if k > m {
        return 0.0;
    }
    if p <= 0.0 {
        return f64::from(k == 0);
    }
    if p >= 1.0 {
        return f64::from(k == m);
    }
    if m <= DIRECT_PMF_MAX {
        binom_coeff(m, k) * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)
    } else {
        (ln_factorial(m) - ln_factorial(k) - ln_factorial(m - k)
            + k as f64 * p.ln()
            + (m - k) as f64 * (1.0 - p).ln())
        .exp()
    }
}

/// Mean and variance of a finite weighted integer law given as
/// `(value, weight)` pairs; weights need not be normalised.
pub(crate) fn weighted_mean_var(items: &[(i64, f64)]) -> (f64, f64) {
    let total: f64 = items.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = items.iter().map(|&(v, w)| v as f64 * w).sum::<f64>() / total;
    let var = items
        .iter()
        .map(|&(v, w)| (v as f64 - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    (mean, var)
}
