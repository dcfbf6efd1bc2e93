// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force oracles and generators shared by the integration tests.
//!
//! Everything here works on raw `Vec<Vec<f64>>` samples and recomputes the
//! statistics by direct counting, independently of the library's rank-based
//! sweeps.

#![allow(dead_code)]

use std::cmp::Ordering;

use kscpd_core::Interval;
use kscpd_core::kernel::{Cdf, StepCdf};
use proptest::prelude::*;

pub type Samples = Vec<Vec<f64>>;

/// Observations at times `s..=e` (1-based).
pub fn window(samples: &Samples, s: usize, e: usize) -> Vec<f64> {
    samples[s - 1..e].iter().flatten().copied().collect()
}

fn count_le(values: &[f64], z: f64) -> usize {
    values.iter().filter(|&&y| y <= z).count()
}

/// Exact form of one `(t, z)` evaluation: `|n cl - nl c|` and `nl nr n`.
#[derive(Clone, Copy, Debug)]
pub struct Exact {
    pub num: u128,
    pub weight: u128,
}

impl Exact {
    /// Compares `num_a / sqrt(w_a)` with `num_b / sqrt(w_b)` exactly.
    pub fn cmp(&self, other: &Exact) -> Ordering {
        (self.num * self.num * other.weight).cmp(&(other.num * other.num * self.weight))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleMax {
    pub value: f64,
    pub t: usize,
    pub z: f64,
}

/// `sqrt(nl nr / n) * |F_l(z) - F_r(z)|` by counting.
pub fn cusum_abs(samples: &Samples, s: usize, e: usize, t: usize, z: f64) -> (f64, Exact) {
    let left = window(samples, s, t);
    let right = window(samples, t + 1, e);
    let (nl, nr) = (left.len(), right.len());
    let n = nl + nr;
    let (cl, cr) = (count_le(&left, z), count_le(&right, z));
    let num = (cl * nr).abs_diff(cr * nl) as u128;
    let weight = (nl * nr * n) as u128;
    let value = num as f64 / ((nl as f64) * (nr as f64) * (n as f64)).sqrt();
    (value, Exact { num, weight })
}

/// Double loop over `s < t < e` and every observed value `z` in ascending
/// order, keeping the first strict maximum.
pub fn brute_max_cusum(samples: &Samples, s: usize, e: usize) -> Option<OracleMax> {
    if e - s < 2 {
        return None;
    }
    let mut zs = window(samples, s, e);
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let mut best: Option<(OracleMax, Exact)> = None;
    for t in s + 1..e {
        for &z in &zs {
            let (value, exact) = cusum_abs(samples, s, e, t, z);
            if best.is_none_or(|(_, b)| exact.cmp(&b) == Ordering::Greater) {
                best = Some((OracleMax { value, t, z }, exact));
            }
        }
    }
    best.map(|(m, _)| m)
}

/// Sum of squared deviations of `1{y <= z}` from its mean.
pub fn indicator_sse(values: &[f64], z: f64) -> f64 {
    let ind: Vec<f64> = values.iter().map(|&y| if y <= z { 1.0 } else { 0.0 }).collect();
    let mean = ind.iter().sum::<f64>() / ind.len() as f64;
    ind.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// NBS written directly from the recursion.
pub fn brute_nbs(samples: &Samples, s: usize, e: usize, tau: f64, out: &mut Vec<usize>) {
    if e <= s + 2 {
        return;
    }
    let Some(best) = brute_max_cusum(samples, s, e) else { return };
    if best.value <= tau {
        return;
    }
    out.push(best.t);
    brute_nbs(samples, s, best.t - 1, tau, out);
    brute_nbs(samples, best.t, e, tau, out);
}

/// NWBS written directly from the recursion.
pub fn brute_nwbs(
    samples: &Samples,
    s: usize,
    e: usize,
    intervals: &[(usize, usize)],
    tau: f64,
    out: &mut Vec<usize>,
) {
    let mut best: Option<OracleMax> = None;
    for &(alpha, beta) in intervals {
        let (lo, hi) = (alpha.max(s), beta.min(e));
        if hi < lo + 2 {
            continue;
        }
        let m = brute_max_cusum(samples, lo, hi).unwrap();
        if best.is_none_or(|b| m.value > b.value) {
            best = Some(m);
        }
    }
    let Some(b) = best else { return };
    if b.value <= tau {
        return;
    }
    out.push(b.t);
    brute_nwbs(samples, s, b.t, intervals, tau, out);
    brute_nwbs(samples, b.t + 1, e, intervals, tau, out);
}

pub fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Observation values: small integers (many ties) or arbitrary floats.
pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![(0i32..5).prop_map(f64::from), -100.0f64..100.0]
}

/// Datasets with `T` in `t_range` and `1 <= n_t <= max_n`.
pub fn samples(t_range: std::ops::RangeInclusive<usize>, max_n: usize) -> impl Strategy<Value = Samples> {
    prop::collection::vec(prop::collection::vec(value(), 1..=max_n), t_range)
}

/// A dataset together with a window `1 <= s < e <= T`.
pub fn samples_with_window(
    t_range: std::ops::RangeInclusive<usize>,
    max_n: usize,
) -> impl Strategy<Value = (Samples, usize, usize)> {
    samples(t_range, max_n).prop_flat_map(|data| {
        let len = data.len();
        (Just(data), 1..len).prop_flat_map(move |(data, s)| (Just(data), Just(s), s + 1..=len))
    })
}

/// Piecewise-constant series: values on a grid of well separated levels
/// with `k` blocks, so rank ties come only from equal levels.
pub fn blocky(len: usize, max_n: usize) -> impl Strategy<Value = Samples> {
    prop::collection::vec(prop::collection::vec(-20i32..20, 1..=max_n), len).prop_map(|rows| {
        rows.into_iter()
            .map(|r| r.into_iter().map(|v| f64::from(v) * 0.25).collect())
            .collect()
    })
}

/// Strictly increasing piecewise-linear map through `knots`, extended
/// linearly with the end slopes.
#[derive(Clone, Debug)]
pub struct Monotone {
    pub knots: Vec<(f64, f64)>,
}

impl Monotone {
    pub fn apply(&self, x: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 <= x).clamp(1, k.len() - 1);
        let ((x0, y0), (x1, y1)) = (k[i - 1], k[i]);
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }
}

/// Knots spanning `[-10, 10]` with slopes in `[0.2, 5]`.
pub fn monotone() -> impl Strategy<Value = Monotone> {
    (prop::collection::vec((0.5f64..4.0, 0.2f64..5.0), 2..8), -50.0f64..50.0).prop_map(
        |(steps, y0)| {
            let mut knots = vec![(-10.0, y0)];
            for (dx, slope) in steps {
                let (x, y) = *knots.last().unwrap();
                knots.push((x + dx, y + slope * dx));
            }
            Monotone { knots }
        },
    )
}

/// Random `(alpha, beta)` pairs with both ends uniform on `1..=len`.
pub fn intervals(len: usize, count: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1..=len, 1..=len), 1..=count)
        .prop_map(|v| v.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect())
}

pub fn to_intervals(pairs: &[(usize, usize)]) -> Vec<Interval> {
    pairs.iter().map(|&(a, b)| Interval::new(a, b).unwrap()).collect()
}

pub fn with_intervals(
    t_range: std::ops::RangeInclusive<usize>,
    max_n: usize,
    count: usize,
) -> impl Strategy<Value = (Samples, Vec<(usize, usize)>)> {
    samples(t_range, max_n).prop_flat_map(move |data| {
        let len = data.len();
        (Just(data), intervals(len, count))
    })
}

/// Dataset with a bracket `left < eta < right <= T`.
pub fn bracketed() -> impl Strategy<Value = (Samples, usize, usize, usize)> {
    samples(3..=15, 4).prop_flat_map(|data| {
        let len = data.len();
        (Just(data), 0..len - 1).prop_flat_map(move |(data, left)| {
            (Just(data), Just(left), left + 1..len).prop_flat_map(move |(data, left, eta)| {
                (Just(data), Just(left), Just(eta), eta + 1..=len)
            })
        })
    })
}

/// Smallest `z` maximising `|D^eta(z)|` on the bracket, by brute force.
pub fn brute_z_hat(samples: &Samples, eta: usize, left: usize, right: usize) -> (f64, f64) {
    let mut zs = window(samples, left + 1, right);
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let mut best: Option<(f64, f64, Exact)> = None;
    for z in zs {
        let (d, exact) = cusum_abs(samples, left + 1, right, eta, z);
        if best.is_none_or(|(_, _, b)| exact.cmp(&b) == Ordering::Greater) {
            best = Some((z, d, exact));
        }
    }
    let (z, d, _) = best.unwrap();
    (z, d)
}

/// Piecewise-constant CDF sequence with its change points (last index of
/// each segment but the final one).
#[derive(Clone, Debug)]
pub struct Population {
    pub series: Vec<(f64, StepCdf)>,
    pub atoms: Vec<Vec<(f64, f64)>>,
    pub change_points: Vec<usize>,
}

pub fn segment_law() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(((-6i32..6).prop_map(|x| f64::from(x) * 0.5), 0.05f64..1.0), 1..5)
}

pub fn population() -> impl Strategy<Value = Population> {
    (3usize..=16)
        .prop_flat_map(|len| {
            (
                Just(len),
                prop::collection::btree_set(2..len, 1..=3.min(len - 2)),
                prop::collection::vec(segment_law(), 4),
                prop::collection::vec(1u32..6, len),
            )
        })
        .prop_filter_map("adjacent segments share a law", |(len, cps, laws, counts)| {
            let change_points: Vec<usize> = cps.into_iter().collect();
            let cdfs: Vec<StepCdf> =
                laws.iter().map(|a| StepCdf::new(a.clone()).unwrap()).collect();
            let knots: Vec<f64> = laws.iter().flatten().map(|a| a.0).collect();
            for k in 0..change_points.len() {
                let gap = knots
                    .iter()
                    .map(|&z| (cdfs[k].cdf(z) - cdfs[k + 1].cdf(z)).abs())
                    .fold(0.0, f64::max);
                if gap < 0.05 {
                    return None;
                }
            }
            let mut series = Vec::with_capacity(len);
            let mut atoms = Vec::with_capacity(len);
            for t in 1..=len {
                let seg = change_points.partition_point(|&c| c < t);
                series.push((f64::from(counts[t - 1]), cdfs[seg].clone()));
                atoms.push(laws[seg].clone());
            }
            Some(Population { series, atoms, change_points })
        })
}

pub fn knot_grid(pop: &Population) -> Vec<f64> {
    pop.series.iter().flat_map(|(_, c)| c.knots().to_vec()).collect()
}

/// Direct mixture evaluation of `|Delta^t_{s,e}(z)|` from the atoms.
pub fn mixture_abs(pop: &Population, s: usize, e: usize, t: usize, z: f64) -> f64 {
    let side = |a: usize, b: usize| {
        let (mut w, mut f) = (0.0, 0.0);
        for k in a..=b {
            let n = pop.series[k - 1].0;
            let atoms = &pop.atoms[k - 1];
            let total: f64 = atoms.iter().map(|x| x.1).sum();
            let below: f64 = atoms.iter().filter(|x| x.0 <= z).map(|x| x.1).sum();
            w += n;
            f += n * below / total;
        }
        (w, f / w)
    };
    let (nl, fl) = side(s, t);
    let (nr, fr) = side(t + 1, e);
    (nl * nr / (nl + nr)).sqrt() * (fl - fr).abs()
}
