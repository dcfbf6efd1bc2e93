// SPDX-License-Identifier: MIT OR Apache-2.0

//! The CUSUM Kolmogorov-Smirnov statistic.
//!
//! For a window `[s, e]` and a candidate split `s <= t < e`,
//!
//! ```text
//! D^t_{s,e}(z) = sqrt(n_{s:t} n_{t+1:e} / n_{s:e}) * (F_{s:t}(z) - F_{t+1:e}(z))
//! ```
//!
//! where `F_{a:b}` is the empirical CDF of all observations at times `a..=b`.
//! Writing `nl = n_{s:t}`, `n = n_{s:e}`, `cl(z)` for the number of left
//! observations `<= z` and `c(z)` for the window count, this is
//!
//! ```text
//! D^t_{s,e}(z) = (n * cl(z) - nl * c(z)) / sqrt(nl * (n - nl) * n)
//! ```
//!
//! The numerator is an integer, so the supremum over `z` for a fixed `t` is
//! found exactly, and candidates at different `t` are compared exactly as
//! well. Floating point only enters once, when the winning value is reported.

mod kinetic;
pub mod population;
mod sweep;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub use population::{Cdf, StepCdf, population_cusum, population_max};

/// Maximised statistic over a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CusumResult {
    /// `max_t sup_z |D^t_{s,e}(z)|`.
    pub value: f64,
    /// Maximising split `t` (last index of the left segment).
    pub argmax_t: usize,
    /// Smallest maximising evaluation point for `argmax_t`.
    pub argmax_z: f64,
    /// The window `(s, e)` that was scanned.
    pub window: (usize, usize),
}

/// How [`max_cusum_with`] evaluates the per-split suprema.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScanStrategy {
    /// Pick per window from its size.
    #[default]
    Auto,
    /// Rescan all distinct values for every split: `O((e - s) * d)` for `d`
    /// distinct values in the window.
    Dense,
    /// Kinetic segment tree over the distinct values:
    /// `O(n_{s:e} log^2 d)` amortised.
    Kinetic,
}

/// `F_{s:e}(z)`: fraction of the observations at times `s..=e` that are `<= z`.
pub fn empirical_cdf(data: &Dataset, s: usize, e: usize, z: f64) -> Result<f64> {
    data.check_range(s, e)?;
    let window = data.window_values(s, e);
    let below = window.iter().filter(|&&y| y <= z).count();
    Ok(below as f64 / window.len() as f64)
}

/// Signed `D^t_{s,e}(z)` for `s <= t < e`.
pub fn cusum_ks_at(data: &Dataset, s: usize, e: usize, t: usize, z: f64) -> Result<f64> {
    data.check_range(s, e)?;
    if t < s || t >= e {
        return Err(Error::Domain(format!("split {t} must satisfy {s} <= t < {e}")));
    }
    let n = data.count_range(s, e);
    let nl = data.count_range(s, t);
    let cl = data.window_values(s, t).iter().filter(|&&y| y <= z).count();
    let c = cl + data.window_values(t + 1, e).iter().filter(|&&y| y <= z).count();
    let num = n as i64 * cl as i64 - nl as i64 * c as i64;
    Ok(statistic(num, nl, n))
}

/// Maximises `D^t_{s,e}` over `s < t < e`, searching `z` only over the
/// observed values in the window.
///
/// Returns `None` when `e - s < 2`, that is when the window has no interior
/// split. Ties go to the smallest `t`, then the smallest `z`.
pub fn max_cusum(data: &Dataset, s: usize, e: usize) -> Result<Option<CusumResult>> {
    max_cusum_with(data, s, e, ScanStrategy::Auto)
}

pub fn max_cusum_with(
    data: &Dataset,
    s: usize,
    e: usize,
    strategy: ScanStrategy,
) -> Result<Option<CusumResult>> {
    data.check_range(s, e)?;
    if e - s < 2 {
        return Ok(None);
    }
    let window = sweep::Window::new(data, s, e);
    let best = match strategy {
        ScanStrategy::Dense => window.scan_dense(),
        ScanStrategy::Kinetic => window.scan_kinetic(),
        ScanStrategy::Auto if window.prefers_kinetic() => window.scan_kinetic(),
        ScanStrategy::Auto => window.scan_dense(),
    };
    Ok(Some(CusumResult {
        value: statistic(best.numerator as i64, best.left, window.total()),
        argmax_t: best.t,
        argmax_z: data.value_of_rank(window.global_rank(best.z_local)),
        window: (s, e),
    }))
}

/// `num / sqrt(nl * (n - nl) * n)`.
pub(crate) fn statistic(num: i64, nl: usize, n: usize) -> f64 {
    let nr = n - nl;
    num as f64 / ((nl as f64) * (nr as f64) * (n as f64)).sqrt()
}

/// Best split found by a scan, still in exact integer form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SplitCandidate {
    pub t: usize,
    /// Local rank of the smallest maximising `z`.
    pub z_local: usize,
    /// `max_z |n cl(z) - nl c(z)|`.
    pub numerator: u64,
    /// `n_{s:t}`.
    pub left: usize,
}

/// True when `a` has a strictly larger statistic than `b`.
///
/// Compares `num_a^2 * w_b` against `num_b^2 * w_a` with `w = nl nr n`,
/// falling back to floating point only if the products overflow `u128`.
pub(crate) fn beats(a: &SplitCandidate, b: &SplitCandidate, n: usize) -> bool {
    let weight = |c: &SplitCandidate| (c.left as u128) * ((n - c.left) as u128) * (n as u128);
    let exact = (|| {
        let lhs = (a.numerator as u128).checked_pow(2)?.checked_mul(weight(b))?;
        let rhs = (b.numerator as u128).checked_pow(2)?.checked_mul(weight(a))?;
        Some(lhs > rhs)
    })();
    exact.unwrap_or_else(|| {
        statistic(a.numerator as i64, a.left, n) > statistic(b.numerator as i64, b.left, n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(samples: Vec<Vec<f64>>) -> Dataset {
        Dataset::new(samples).unwrap()
    }

    #[test]
    fn empirical_cdf_examples() {
        let data = ds(vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]]);
        assert_eq!(empirical_cdf(&data, 1, 4, 0.0).unwrap(), 0.5);
        assert_eq!(empirical_cdf(&data, 1, 4, -1.0).unwrap(), 0.0);
        assert_eq!(empirical_cdf(&data, 1, 4, 1.0).unwrap(), 1.0);
        let ragged = ds(vec![vec![1.0, 2.0], vec![3.0]]);
        assert_eq!(empirical_cdf(&ragged, 1, 2, 2.0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn empirical_cdf_rejects_bad_windows() {
        let data = ds(vec![vec![0.0], vec![1.0]]);
        assert!(matches!(empirical_cdf(&data, 0, 1, 0.0), Err(Error::Bounds(_))));
        assert!(matches!(empirical_cdf(&data, 2, 1, 0.0), Err(Error::Bounds(_))));
        assert!(matches!(empirical_cdf(&data, 1, 3, 0.0), Err(Error::Bounds(_))));
    }

    #[test]
    fn cusum_at_examples() {
        let step = ds(vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]]);
        assert_eq!(cusum_ks_at(&step, 1, 4, 2, 0.0).unwrap(), 1.0);
        assert_eq!(cusum_ks_at(&step, 1, 4, 2, -5.0).unwrap(), 0.0);
        let alt = ds(vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]]);
        assert_eq!(cusum_ks_at(&alt, 1, 4, 2, 0.0).unwrap(), 0.0);
        assert!(matches!(cusum_ks_at(&step, 1, 4, 4, 0.0), Err(Error::Domain(_))));
        assert!(matches!(cusum_ks_at(&step, 2, 4, 1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cusum_at_respects_weight_bound() {
        let data = ds(vec![vec![0.3, 1.2], vec![-0.4], vec![2.0, 0.1, 0.7], vec![5.0]]);
        for t in 1..4 {
            let bound = ((data.count_range(1, t) * data.count_range(t + 1, 4)) as f64
                / data.total() as f64)
                .sqrt();
            for &z in data.window_values(1, 4) {
                assert!(cusum_ks_at(&data, 1, 4, t, z).unwrap().abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn max_cusum_step() {
        let data = ds([0.0, 0.0, 0.0, 1.0, 1.0, 1.0].iter().map(|&v| vec![v]).collect());
        for strategy in [ScanStrategy::Dense, ScanStrategy::Kinetic] {
            let res = max_cusum_with(&data, 1, 6, strategy).unwrap().unwrap();
            assert_eq!(res.argmax_t, 3);
            assert_eq!(res.argmax_z, 0.0);
            assert!((res.value - 1.5f64.sqrt()).abs() < 1e-15);
            assert_eq!(res.window, (1, 6));
        }
    }

    #[test]
    fn max_cusum_constant_is_zero() {
        let data = ds(vec![vec![2.5, 2.5]; 7]);
        for strategy in [ScanStrategy::Dense, ScanStrategy::Kinetic] {
            let res = max_cusum_with(&data, 1, 7, strategy).unwrap().unwrap();
            assert_eq!(res.value, 0.0);
            assert_eq!(res.argmax_t, 2);
            assert_eq!(res.argmax_z, 2.5);
        }
    }

    #[test]
    fn max_cusum_short_window_has_no_candidate() {
        let data = ds(vec![vec![0.0], vec![1.0], vec![2.0]]);
        assert_eq!(max_cusum(&data, 1, 2).unwrap(), None);
        assert_eq!(max_cusum(&data, 2, 2).unwrap(), None);
        assert!(max_cusum(&data, 1, 3).unwrap().is_some());
        assert!(max_cusum(&data, 1, 4).is_err());
    }

    #[test]
    fn exact_comparison_treats_mirrored_splits_as_ties() {
        let n = 8;
        let a = SplitCandidate { t: 1, z_local: 0, numerator: 3, left: 2 };
        let b = SplitCandidate { t: 2, z_local: 0, numerator: 3, left: 6 };
        let c = SplitCandidate { t: 3, z_local: 0, numerator: 4, left: 4 };
        assert!(!beats(&a, &b, n));
        assert!(!beats(&b, &a, n));
        // 16/128 > 9/96
        assert!(beats(&c, &a, n));
        assert!(!beats(&a, &c, n));
    }
}
