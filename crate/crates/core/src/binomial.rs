//! Binomial weights evaluated in the log domain.

use alloc::vec::Vec;

use crate::math::{exp, ln_gamma, log, log1p};

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln[C(n, k) p^k (1-p)^(n-k)]`, `-inf` for impossible outcomes.
pub fn ln_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let success = if k == 0 {
        0.0
    } else if p == 0.0 {
        return f64::NEG_INFINITY;
    } else {
        k as f64 * log(p)
    };
    let failure = if k == n {
        0.0
    } else if p == 1.0 {
        return f64::NEG_INFINITY;
    } else {
        (n - k) as f64 * log1p(-p)
    };
    ln_choose(n, k) + success + failure
}

pub fn pmf(n: u64, k: u64, p: f64) -> f64 {
    exp(ln_pmf(n, k, p))
}

/// Nonzero weights `(k, P[K = k])` for `k` in `range`, heaviest first.
pub fn weights_descending(n: u64, range: core::ops::RangeInclusive<u64>, p: f64) -> Vec<(u64, f64)> {
    let mut w: Vec<(u64, f64)> = range
        .map(|k| (k, pmf(n, k, p)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    w.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    w
}
