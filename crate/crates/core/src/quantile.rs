//! Nearest-rank order statistics.
//!
//! Two rules are shared across the crate so that the ReAct cutoff, the OOD
//! threshold and the FPR-at-TPR metric cannot drift apart:
//!
//! * [`nearest_rank`]: the 1-based rank `ceil(p/100 * n)` used for percentiles.
//! * [`retention_cut`]: the lowest `k` scores that may fall at or below a
//!   threshold while at least a fraction `q` of all scores stays strictly above.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// 1-based nearest rank for percentile `p` over `n` values, clamped to `[1, n]`.
///
/// The rank is the smallest `r` with `100 * r >= p * n`; the ceil estimate is
/// corrected in both directions so rounding in `p * n / 100` cannot shift it.
pub fn nearest_rank(p: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    let target = p * n as f64;
    let mut rank = libm::ceil(target / 100.0).clamp(1.0, n as f64) as usize;
    while rank > 1 && (rank - 1) as f64 * 100.0 >= target {
        rank -= 1;
    }
    while rank < n && (rank as f64) * 100.0 < target {
        rank += 1;
    }
    rank
}

/// Largest `k` in `[0, n]` with `(n - k) / n >= q`.
pub fn excluded_count(q: f64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let keeps = |k: usize| (n - k) as f64 / n as f64 >= q;
    let mut k = libm::floor(n as f64 * (1.0 - q)).clamp(0.0, n as f64) as usize;
    while k > 0 && !keeps(k) {
        k -= 1;
    }
    while k < n && keeps(k + 1) {
        k += 1;
    }
    k
}

/// The `rank`-th smallest value (1-based) without sorting the whole input.
pub fn kth_smallest(values: &[f64], rank: usize) -> f64 {
    debug_assert!(rank >= 1 && rank <= values.len());
    let mut scratch: Vec<f64> = values.to_vec();
    let (_, v, _) = scratch.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

/// Nearest-rank `p`-th percentile of `values`, `p` in `(0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        bail!(Calibration, "percentile of an empty set");
    }
    if !(p > 0.0 && p <= 100.0) {
        bail!(Domain, "percentile {p} outside (0, 100]");
    }
    Ok(kth_smallest(values, nearest_rank(p, values.len())))
}

/// Threshold that keeps at least a fraction `q` of `scores` strictly above it.
///
/// Returns `(threshold, k)`: with `k = 0` the threshold is `-inf`, otherwise
/// it is the `k`-th smallest score.
pub fn retention_cut(scores: &[f64], q: f64) -> Result<(f64, usize)> {
    if scores.is_empty() {
        bail!(Calibration, "threshold over an empty score set");
    }
    if !(q > 0.0 && q <= 1.0) {
        bail!(Domain, "retention {q} outside (0, 1]");
    }
    let k = excluded_count(q, scores.len());
    let tau = if k == 0 { f64::NEG_INFINITY } else { kth_smallest(scores, k) };
    Ok((tau, k))
}

/// Fraction of `scores` strictly greater than `threshold`.
pub fn fraction_above(scores: &[f64], threshold: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|&&s| s > threshold).count() as f64 / scores.len() as f64
}
