// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary segmentation and wild binary segmentation on the CUSUM KS statistic.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{CusumResult, max_cusum};

/// Closed search interval `[alpha, beta]` of time indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub alpha: usize,
    pub beta: usize,
}

impl Interval {
    pub fn new(alpha: usize, beta: usize) -> Result<Self> {
        if alpha == 0 || alpha > beta {
            return Err(Error::Config(format!("invalid interval [{alpha}, {beta}]")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn len(&self) -> usize {
        self.beta - self.alpha
    }

    pub fn is_empty(&self) -> bool {
        self.alpha == self.beta
    }

    /// `[s, e] ∩ [alpha, beta]` as `(s_m, e_m)`, or `None` if disjoint.
    pub fn intersect(&self, s: usize, e: usize) -> Option<(usize, usize)> {
        let lo = s.max(self.alpha);
        let hi = e.min(self.beta);
        (lo <= hi).then_some((lo, hi))
    }
}

/// One detected change point and where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    /// Last time index of the left segment.
    pub time: usize,
    /// Window whose maximised statistic produced the point.
    pub window: Option<(usize, usize)>,
    /// Statistic value that crossed the threshold (or the test statistic for
    /// points kept by a merge).
    pub statistic: Option<f64>,
}

impl ChangePoint {
    pub fn bare(time: usize) -> Self {
        Self { time, window: None, statistic: None }
    }
}

/// Sorted set of estimated change points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    change_points: Vec<ChangePoint>,
}

impl Segmentation {
    /// Sorts by time. Duplicate times keep the first record.
    pub fn new(mut change_points: Vec<ChangePoint>) -> Self {
        change_points.sort_by_key(|c| c.time);
        change_points.dedup_by_key(|c| c.time);
        Self { change_points }
    }

    pub fn from_times(times: impl IntoIterator<Item = usize>) -> Self {
        Self::new(times.into_iter().map(ChangePoint::bare).collect())
    }

    pub fn times(&self) -> Vec<usize> {
        self.change_points.iter().map(|c| c.time).collect()
    }

    pub fn change_points(&self) -> &[ChangePoint] {
        &self.change_points
    }

    pub fn len(&self) -> usize {
        self.change_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.change_points.is_empty()
    }

    pub fn contains(&self, time: usize) -> bool {
        self.change_points.binary_search_by_key(&time, |c| c.time).is_ok()
    }

    /// Neighbours `(k, k')` with `k < time < k'`, using `0` and `len` as
    /// sentinels when there is no detected neighbour on a side.
    pub fn bracket(&self, time: usize, len: usize) -> (usize, usize) {
        let idx = self.change_points.partition_point(|c| c.time < time);
        let left = if idx == 0 { 0 } else { self.change_points[idx - 1].time };
        let right = self.change_points[idx..]
            .iter()
            .map(|c| c.time)
            .find(|&c| c > time)
            .unwrap_or(len);
        (left, right)
    }

    /// Applies `f` to every time and window endpoint, e.g. to map split-half
    /// indices back to the original series.
    pub fn map_times(&self, f: impl Fn(usize) -> usize) -> Self {
        Self::new(
            self.change_points
                .iter()
                .map(|c| ChangePoint {
                    time: f(c.time),
                    window: c.window.map(|(lo, hi)| (f(lo), f(hi))),
                    statistic: c.statistic,
                })
                .collect(),
        )
    }
}

/// Draws `count` intervals with both endpoints uniform on `1..=len`.
///
/// Endpoints are ordered after drawing. With `max_len`, draws longer than
/// the cap are rejected and redrawn.
pub fn sample_intervals<R: Rng + ?Sized>(
    len: usize,
    count: usize,
    max_len: Option<usize>,
    rng: &mut R,
) -> Result<Vec<Interval>> {
    if len == 0 {
        return Err(Error::Config("series length must be positive".into()));
    }
    if count == 0 {
        return Err(Error::Config("need at least one interval".into()));
    }
    if let Some(cap) = max_len {
        if cap < 2 {
            return Err(Error::Config(format!("max interval length must be >= 2, got {cap}")));
        }
        if cap > len {
            return Err(Error::Config(format!(
                "max interval length {cap} exceeds series length {len}"
            )));
        }
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.random_range(1..=len);
        let b = rng.random_range(1..=len);
        let iv = Interval { alpha: a.min(b), beta: a.max(b) };
        if max_len.is_none_or(|cap| iv.len() <= cap) {
            out.push(iv);
        }
    }
    Ok(out)
}

fn check_threshold(tau: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {tau}")));
    }
    Ok(())
}

fn check_outer(data: &Dataset, s: usize, e: usize) -> Result<()> {
    if s == 0 || s >= e || e > data.len() {
        return Err(Error::Bounds(format!(
            "window ({s}, {e}) must satisfy 1 <= s < e <= {}",
            data.len()
        )));
    }
    Ok(())
}

/// Nonparametric binary segmentation on `(s, e)` with threshold `tau`.
///
/// Windows with `e - s <= 2` are not scanned. After a detection at `b` the
/// search continues on `(s, b - 1)` and `(b, e)`.
pub fn nbs(data: &Dataset, s: usize, e: usize, tau: f64) -> Result<Segmentation> {
    check_outer(data, s, e)?;
    check_threshold(tau)?;
    let mut found = Vec::new();
    let mut stack = vec![(s, e)];
    while let Some((s, e)) = stack.pop() {
        if e < s + 3 {
            continue;
        }
        let res = max_cusum(data, s, e)?.expect("window has an interior split");
        if res.value <= tau {
            continue;
        }
        let b = res.argmax_t;
        found.push(ChangePoint { time: b, window: Some((s, e)), statistic: Some(res.value) });
        stack.push((b, e));
        stack.push((s, b - 1));
    }
    Ok(Segmentation::new(found))
}

/// Nonparametric wild binary segmentation on `(s, e)` with threshold `tau`.
///
/// Each step maximises the statistic over `[s, e] ∩ [alpha_m, beta_m]` for
/// every interval, keeps the first maximiser, and on detection at `b`
/// continues on `(s, b)` and `(b + 1, e)`.
pub fn nwbs(
    data: &Dataset,
    s: usize,
    e: usize,
    intervals: &[Interval],
    tau: f64,
) -> Result<Segmentation> {
    check_threshold(tau)?;
    Ok(NwbsPath::build(data, s, e, intervals, tau)?.at(tau))
}

/// One accepted step of the wild binary segmentation recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathNode {
    pub time: usize,
    pub statistic: f64,
    pub window: (usize, usize),
    /// Smallest statistic on the way from the root to this node; the node is
    /// detected exactly for thresholds below it.
    pub survives_below: f64,
}

/// The wild binary segmentation recursion for every threshold at once.
///
/// Lowering the threshold only extends the recursion tree, so the output for
/// any `tau >= floor` is the set of nodes whose root path stays above `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NwbsPath {
    floor: f64,
    nodes: Vec<PathNode>,
}

impl NwbsPath {
    /// Runs the recursion with threshold `floor`, recording every step.
    pub fn build(
        data: &Dataset,
        s: usize,
        e: usize,
        intervals: &[Interval],
        floor: f64,
    ) -> Result<Self> {
        check_outer(data, s, e)?;
        if intervals.is_empty() {
            return Err(Error::Config("need at least one interval".into()));
        }
        if let Some(bad) = intervals.iter().find(|iv| iv.alpha == 0 || iv.alpha > iv.beta) {
            return Err(Error::Config(format!("invalid interval [{}, {}]", bad.alpha, bad.beta)));
        }
        if !(floor >= 0.0) {
            return Err(Error::Config(format!("threshold must be nonnegative, got {floor}")));
        }

        let mut cache = WindowCache::default();
        let mut nodes = Vec::new();
        let mut stack = vec![(s, e, f64::INFINITY)];
        while let Some((s, e, path_min)) = stack.pop() {
            let Some(best) = cache.best_over(data, s, e, intervals)? else {
                continue;
            };
            if best.value <= floor {
                continue;
            }
            let survives_below = path_min.min(best.value);
            let b = best.argmax_t;
            nodes.push(PathNode {
                time: b,
                statistic: best.value,
                window: best.window,
                survives_below,
            });
            stack.push((b + 1, e, survives_below));
            stack.push((s, b, survives_below));
        }
        nodes.sort_by_key(|n| n.time);
        Ok(Self { floor, nodes })
    }

    /// Output for threshold `tau`, which must not be below the build floor.
    pub fn at(&self, tau: f64) -> Segmentation {
        debug_assert!(tau >= self.floor);
        Segmentation::new(
            self.nodes
                .iter()
                .filter(|n| n.survives_below > tau)
                .map(|n| ChangePoint {
                    time: n.time,
                    window: Some(n.window),
                    statistic: Some(n.statistic),
                })
                .collect(),
        )
    }

    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// Memoised window maxima for one dataset.
#[derive(Default)]
struct WindowCache {
    scanned: HashMap<(usize, usize), CusumResult>,
}

impl WindowCache {
    /// `max_m a_m` over the intersected intervals, first maximiser on ties;
    /// `None` when every intersection is shorter than 2.
    fn best_over(
        &mut self,
        data: &Dataset,
        s: usize,
        e: usize,
        intervals: &[Interval],
    ) -> Result<Option<CusumResult>> {
        let windows: Vec<Option<(usize, usize)>> = intervals
            .iter()
            .map(|iv| iv.intersect(s, e).filter(|(lo, hi)| hi - lo >= 2))
            .collect();

        let mut missing: Vec<(usize, usize)> = windows
            .iter()
            .flatten()
            .filter(|w| !self.scanned.contains_key(w))
            .copied()
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let fresh = missing
            .into_par_iter()
            .map(|(lo, hi)| {
                let res = max_cusum(data, lo, hi)?.expect("window has an interior split");
                Ok(((lo, hi), res))
            })
            .collect::<Result<Vec<_>>>()?;
        self.scanned.extend(fresh);

        let mut best: Option<CusumResult> = None;
        for w in windows.iter().flatten() {
            let res = self.scanned[w];
            if best.is_none_or(|b| res.value > b.value) {
                best = Some(res);
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn step(n: usize) -> Dataset {
        Dataset::from_series(
            &(0..2 * n).map(|i| if i < n { 0.0 } else { 1.0 }).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn nbs_finds_single_step() {
        let data = step(50);
        assert_eq!(nbs(&data, 1, 100, 1.0).unwrap().times(), vec![50]);
        let seg = nbs(&data, 1, 100, 1.0).unwrap();
        let cp = &seg.change_points()[0];
        assert_eq!(cp.window, Some((1, 100)));
        assert!((cp.statistic.unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn nbs_on_constant_or_infinite_threshold_is_empty() {
        let data = Dataset::from_series(&[3.0; 40]).unwrap();
        assert!(nbs(&data, 1, 40, 1e-9).unwrap().is_empty());
        assert!(nbs(&step(20), 1, 40, f64::INFINITY).unwrap().is_empty());
    }

    #[test]
    fn nbs_rejects_bad_arguments() {
        let data = step(5);
        assert!(nbs(&data, 1, 10, 0.0).is_err());
        assert!(nbs(&data, 1, 10, f64::NAN).is_err());
        assert!(nbs(&data, 0, 10, 1.0).is_err());
        assert!(nbs(&data, 1, 11, 1.0).is_err());
        // too short to scan
        assert!(nbs(&data, 1, 3, 0.1).unwrap().is_empty());
    }

    #[test]
    fn nwbs_finds_single_step() {
        let data = step(50);
        let intervals = vec![Interval::new(1, 100).unwrap(), Interval::new(30, 70).unwrap()];
        assert_eq!(nwbs(&data, 1, 100, &intervals, 1.0).unwrap().times(), vec![50]);
    }

    #[test]
    fn nwbs_with_only_short_intersections_is_empty() {
        let data = step(50);
        let intervals = vec![Interval::new(10, 11).unwrap(), Interval::new(50, 51).unwrap()];
        assert!(nwbs(&data, 1, 100, &intervals, 1e-6).unwrap().is_empty());
        let constant = Dataset::from_series(&[1.0; 30]).unwrap();
        let full = vec![Interval::new(1, 30).unwrap()];
        assert!(nwbs(&constant, 1, 30, &full, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn interval_sampling_is_reproducible_and_bounded() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_intervals(100, 5, None, &mut rng).unwrap()
        };
        let first = draw(3);
        assert_eq!(first.len(), 5);
        assert_eq!(first, draw(3));
        assert!(first.iter().all(|iv| 1 <= iv.alpha && iv.alpha <= iv.beta && iv.beta <= 100));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let capped = sample_intervals(100, 200, Some(10), &mut rng).unwrap();
        assert!(capped.iter().all(|iv| iv.len() <= 10));

        let tiny = sample_intervals(2, 3, None, &mut rng).unwrap();
        assert!(tiny.iter().all(|iv| iv.alpha >= 1 && iv.beta <= 2));
    }

    #[test]
    fn interval_sampling_rejects_bad_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_intervals(100, 5, Some(1), &mut rng).is_err());
        assert!(sample_intervals(100, 0, None, &mut rng).is_err());
        assert!(sample_intervals(10, 2, Some(11), &mut rng).is_err());
    }

    #[test]
    fn bracket_uses_sentinels() {
        let seg = Segmentation::from_times([10, 30]);
        assert_eq!(seg.bracket(5, 50), (0, 10));
        assert_eq!(seg.bracket(20, 50), (10, 30));
        assert_eq!(seg.bracket(40, 50), (30, 50));
        assert_eq!(Segmentation::default().bracket(7, 9), (0, 9));
    }

    #[test]
    fn path_matches_direct_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let series: Vec<f64> = (0..120)
            .map(|i| (i / 30) as f64 * 0.8 + rng.random::<f64>())
            .collect();
        let data = Dataset::from_series(&series).unwrap();
        let intervals = sample_intervals(120, 40, None, &mut rng).unwrap();
        let path = NwbsPath::build(&data, 1, 120, &intervals, 0.2).unwrap();
        for tau in [0.2, 0.5, 0.9, 1.3, 2.0, 3.0] {
            let direct = NwbsPath::build(&data, 1, 120, &intervals, tau).unwrap().at(tau);
            assert_eq!(path.at(tau), direct, "tau {tau}");
        }
    }
}
