// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold selection by sample splitting.
//!
//! One half of the data (`W`) runs wild binary segmentation over a grid of
//! thresholds; the other half (`Y`) decides which of the nested candidate
//! sets to keep with a penalised sum-of-squares test at a single evaluation
//! point.
//!
//! Bracketing convention: a candidate `eta` with neighbours `(left, right)`
//! is tested on the observations at times `left + 1..=right`, split into
//! `left + 1..=eta` and `eta + 1..=right`. Missing neighbours are the
//! sentinels `0` and `T`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::statistic;
use crate::segmentation::{ChangePoint, Interval, NwbsPath, Segmentation, sample_intervals};

/// Number of intervals used when none is configured.
pub const DEFAULT_INTERVALS: usize = 120;
/// Size of the default threshold grid.
pub const DEFAULT_GRID_POINTS: usize = 20;

/// Penalty `lambda` and ascending threshold grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub tau_grid: Vec<f64>,
    /// Also insert every threshold strictly inside the grid range at which
    /// the NWBS output changes, so consecutive candidate sets differ by a
    /// single point (up to exact ties).
    #[serde(default = "yes")]
    pub refine: bool,
}

fn yes() -> bool {
    true
}

impl PenaltyConfig {
    /// Refinement is on.
    pub fn new(lambda: f64, tau_grid: Vec<f64>) -> Result<Self> {
        let config = Self { lambda, tau_grid, refine: true };
        config.validate()?;
        Ok(config)
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    /// `lambda = 2 log(n) / 3` and a geometric grid from `0.1 sqrt(log n)` to
    /// `sqrt(n)`, for `n` total observations.
    pub fn default_for(total: usize) -> Self {
        Self { lambda: default_lambda(total), tau_grid: default_tau_grid(total), refine: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::Config("threshold grid is empty".into()));
        }
        if !self.tau_grid.iter().all(|&t| t > 0.0) {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        if self.tau_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("threshold grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

pub fn default_lambda(total: usize) -> f64 {
    2.0 * (total.max(2) as f64).ln() / 3.0
}

pub fn default_tau_grid(total: usize) -> Vec<f64> {
    let n = total.max(2) as f64;
    geometric_grid(0.1 * n.ln().sqrt(), n.sqrt(), DEFAULT_GRID_POINTS)
}

/// `points` values from `lo` to `hi` with constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
            (0..points).map(|k| lo * ratio.powi(k as i32)).collect()
        }
    }
}

/// How observations are divided between the detection and evaluation halves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Odd times detect, even times evaluate; both halves are re-indexed.
    Time,
    /// Every time point's observations alternate between the halves.
    WithinTime,
    /// `WithinTime` when every `n_t >= 2`, otherwise `Time`.
    #[default]
    Auto,
}

/// Detection half `W`, evaluation half `Y`, and the index map back to the
/// original series.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub detect: Dataset,
    pub evaluate: Dataset,
    pub mode: SplitMode,
}

impl SplitPair {
    /// Original time of a detection-half index. In time-split mode index `k`
    /// of `W` is time `2k - 1`.
    pub fn to_original(&self, index: usize) -> usize {
        match self.mode {
            SplitMode::Time => 2 * index - 1,
            _ => index,
        }
    }
}

/// Splits by odd and even times.
pub fn split_even_odd(data: &Dataset) -> Result<SplitPair> {
    split(data, SplitMode::Time)
}

pub fn split(data: &Dataset, mode: SplitMode) -> Result<SplitPair> {
    let mode = match mode {
        SplitMode::Auto if data.min_count() >= 2 => SplitMode::WithinTime,
        SplitMode::Auto => SplitMode::Time,
        m => m,
    };
    let samples = data.to_samples();
    let (detect, evaluate) = match mode {
        SplitMode::Time => {
            if data.len() < 4 {
                return Err(Error::InvalidData(format!(
                    "time split needs T >= 4, got {}",
                    data.len()
                )));
            }
            let (odd, even): (Vec<_>, Vec<_>) =
                samples.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
            (
                odd.into_iter().map(|(_, v)| v).collect(),
                even.into_iter().map(|(_, v)| v).collect(),
            )
        }
        SplitMode::WithinTime => {
            if data.min_count() < 2 {
                return Err(Error::InvalidData(
                    "within-time split needs at least two observations per time".into(),
                ));
            }
            samples
                .into_iter()
                .map(|obs| {
                    let (w, y): (Vec<_>, Vec<_>) =
                        obs.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
                    (
                        w.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
                        y.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
                    )
                })
                .unzip()
        }
        SplitMode::Auto => unreachable!(),
    };
    Ok(SplitPair { detect: Dataset::new(detect)?, evaluate: Dataset::new(evaluate)?, mode })
}

/// Outcome of the penalised sum-of-squares test for one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainTest {
    pub eta: usize,
    pub left: usize,
    pub right: usize,
    /// Smallest maximiser of `|D^eta(z)|` over the bracket's observations.
    pub z_hat: f64,
    /// Signed statistic `D^eta(z_hat)` on the bracket.
    pub statistic: f64,
    /// Sum of squared indicator residuals with separate means on each side.
    pub split_sse: f64,
    /// Same with one pooled mean.
    pub pooled_sse: f64,
    pub lambda: f64,
    /// `pooled_sse > split_sse + lambda`: the split pays for its penalty.
    pub accepted: bool,
}

impl GainTest {
    /// `split_sse + lambda > pooled_sse`: the candidate does not justify
    /// itself and can be dropped.
    pub fn fails(&self) -> bool {
        self.split_sse + self.lambda > self.pooled_sse
    }
}

/// Largest `|n cl(z) - nl c(z)|` over the observed values of `[lo, hi]` for
/// the split after `eta`, with its smallest maximiser.
fn sup_at_split(data: &Dataset, lo: usize, hi: usize, eta: usize) -> (i64, f64) {
    let nl = data.count_range(lo, eta) as i64;
    let n = data.count_range(lo, hi) as i64;
    let left_len = nl as usize;
    let mut tagged: Vec<(f64, bool)> = data
        .window_values(lo, hi)
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i < left_len))
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut cl, mut c) = (0i64, 0i64);
    let (mut best, mut best_z) = (0i64, tagged[0].0);
    let mut i = 0;
    while i < tagged.len() {
        let z = tagged[i].0;
        while i < tagged.len() && tagged[i].0 == z {
            c += 1;
            cl += tagged[i].1 as i64;
            i += 1;
        }
        let num = n * cl - nl * c;
        if num.abs() > best.abs() {
            best = num;
            best_z = z;
        }
    }
    (best, best_z)
}

/// Penalised sum-of-squares test of candidate `eta` inside `(left, right)`.
pub fn sse_gain_test(
    data: &Dataset,
    eta: usize,
    left: usize,
    right: usize,
    lambda: f64,
) -> Result<GainTest> {
    if !(left < eta && eta < right) {
        return Err(Error::Domain(format!(
            "candidate {eta} is not strictly inside ({left}, {right})"
        )));
    }
    if right > data.len() {
        return Err(Error::Bounds(format!("bracket end {right} exceeds T = {}", data.len())));
    }
    let (lo, hi) = (left + 1, right);
    let (num, z_hat) = sup_at_split(data, lo, hi, eta);
    let nl = data.count_range(lo, eta);
    let n = data.count_range(lo, hi);

    let indicator = |y: &f64| if *y <= z_hat { 1.0 } else { 0.0 };
    let sse = |values: &[f64]| {
        let mean = values.iter().map(indicator).sum::<f64>() / values.len() as f64;
        values.iter().map(|y| (indicator(y) - mean).powi(2)).sum::<f64>()
    };
    let split_sse = sse(data.window_values(lo, eta)) + sse(data.window_values(eta + 1, hi));
    let pooled_sse = sse(data.window_values(lo, hi));
    Ok(GainTest {
        eta,
        left,
        right,
        z_hat,
        statistic: statistic(num, nl, n),
        split_sse,
        pooled_sse,
        lambda,
        accepted: pooled_sse > split_sse + lambda,
    })
}

/// `max_s sup_z |D^eta_{a_s, b_s}(z)|^2` with `(a_s, b_s)` the bracket
/// intersected with each interval. Intervals that leave no split at `eta`
/// contribute zero.
pub fn interval_sup_squared(
    data: &Dataset,
    eta: usize,
    left: usize,
    right: usize,
    intervals: &[Interval],
) -> Result<f64> {
    if !(left < eta && eta < right) || right > data.len() {
        return Err(Error::Domain(format!(
            "candidate {eta} is not strictly inside ({left}, {right})"
        )));
    }
    let mut best = 0.0f64;
    for iv in intervals {
        let Some((lo, hi)) = iv.intersect(left + 1, right) else { continue };
        if lo > eta || eta >= hi {
            continue;
        }
        let (num, _) = sup_at_split(data, lo, hi, eta);
        let d = statistic(num, data.count_range(lo, eta), data.count_range(lo, hi));
        best = best.max(d * d);
    }
    Ok(best)
}

/// Result of merging two candidate sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub segmentation: Segmentation,
    pub tests: Vec<GainTest>,
    pub warnings: Vec<String>,
}

/// Merges two candidate sets, keeping their intersection untested and each
/// point of the symmetric difference only if it passes [`sse_gain_test`]
/// against its neighbours in the other set.
pub fn update_merge(
    data: &Dataset,
    first: &Segmentation,
    second: &Segmentation,
    lambda: f64,
) -> Result<MergeOutcome> {
    let len = data.len();
    let mut kept: Vec<ChangePoint> = first
        .change_points()
        .iter()
        .filter(|c| second.contains(c.time))
        .cloned()
        .collect();
    let only_second = second.change_points().iter().filter(|c| !first.contains(c.time));
    let only_first = first.change_points().iter().filter(|c| !second.contains(c.time));
    let mut candidates: Vec<(usize, &Segmentation)> = only_second
        .map(|c| (c.time, first))
        .chain(only_first.map(|c| (c.time, second)))
        .collect();
    candidates.sort_by_key(|c| c.0);

    let mut tests = Vec::new();
    let mut warnings = Vec::new();
    for (eta, other) in candidates {
        let (left, right) = other.bracket(eta, len);
        if eta == 0 || eta >= len {
            warnings.push(format!("candidate {eta} cannot be bracketed inside (0, {len}); skipped"));
            continue;
        }
        let test = sse_gain_test(data, eta, left, right, lambda)?;
        if test.accepted {
            kept.push(ChangePoint {
                time: eta,
                window: Some((left + 1, right)),
                statistic: Some(test.statistic.abs()),
            });
        }
        tests.push(test);
    }
    Ok(MergeOutcome { segmentation: Segmentation::new(kept), tests, warnings })
}

/// Which inequality decides whether a candidate set may shrink.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Test only the smallest dropped point with the sum-of-squares gain.
    SmallestCandidate,
    /// Require `lambda > max_s sup_z |D^eta_{a_s,b_s}(z)|^2` for every dropped
    /// point, with the bracket intersected with each interval.
    Strict,
    /// `SmallestCandidate` when exactly one point is dropped, `Strict` otherwise.
    #[default]
    Adaptive,
}

/// One comparison made while walking the threshold grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    /// Index into the (possibly refined) grid of the next, larger threshold.
    pub grid_index: usize,
    pub tau: f64,
    pub dropped: Vec<usize>,
    pub test: Option<GainTest>,
    pub moved_on: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoOutcome {
    /// Selected set, on the index scale of the split halves.
    pub segmentation: Segmentation,
    /// Grid index whose set was selected.
    pub selected: usize,
    pub tau: f64,
    /// Grid actually walked, after refinement.
    pub tau_grid: Vec<f64>,
    /// Candidate set sizes along the grid.
    pub set_sizes: Vec<usize>,
    pub steps: Vec<SelectionStep>,
}

/// Wild binary segmentation with threshold selection.
///
/// Runs NWBS on `detect` for every threshold in the grid, then walks the
/// nested sets from the smallest threshold upwards. Whenever the next set is
/// smaller, the dropped points are tested on `evaluate` according to `rule`;
/// if they fail to justify themselves the walk moves on, otherwise it stops
/// and returns the current set.
pub fn nwbs_auto(
    evaluate: &Dataset,
    detect: &Dataset,
    intervals: &[Interval],
    config: &PenaltyConfig,
    rule: SelectionRule,
) -> Result<AutoOutcome> {
    config.validate()?;
    if intervals.is_empty() {
        return Err(Error::Config("need at least one interval".into()));
    }
    let mut grid = config.tau_grid.clone();
    let sets: Vec<Segmentation> = if detect.len() < 2 {
        vec![Segmentation::default(); grid.len()]
    } else {
        let path = NwbsPath::build(detect, 1, detect.len(), intervals, grid[0])?;
        if config.refine {
            grid = refine_grid(&grid, &path);
        }
        grid.iter().map(|&tau| path.at(tau)).collect()
    };
    let grid = &grid;
    let len = evaluate.len();

    let mut current = 0;
    let mut steps = Vec::new();
    for m in 0..grid.len() - 1 {
        let next = &sets[m + 1];
        let now: BTreeSet<usize> = sets[current].times().into_iter().collect();
        let after: BTreeSet<usize> = next.times().into_iter().collect();
        if now == after {
            current = m + 1;
            continue;
        }
        let dropped: Vec<usize> = now.difference(&after).copied().collect();
        let rule = match rule {
            SelectionRule::Adaptive if dropped.len() == 1 => SelectionRule::SmallestCandidate,
            SelectionRule::Adaptive => SelectionRule::Strict,
            other => other,
        };
        let (moved_on, test) = match (rule, dropped.first()) {
            (_, None) => (true, None),
            (SelectionRule::Strict, Some(_)) => {
                let mut all_fail = true;
                for &eta in &dropped {
                    let (left, right) = next.bracket(eta, len);
                    if let Ok(sup) = interval_sup_squared(evaluate, eta, left, right, intervals) {
                        all_fail &= config.lambda > sup;
                    }
                }
                (all_fail, None)
            }
            (_, Some(&eta)) => {
                let (left, right) = next.bracket(eta, len);
                match sse_gain_test(evaluate, eta, left, right, config.lambda) {
                    Ok(test) => (test.fails(), Some(test)),
                    // No evaluation data on one side of the candidate.
                    Err(_) => (true, None),
                }
            }
        };
        steps.push(SelectionStep { grid_index: m + 1, tau: grid[m + 1], dropped, test, moved_on });
        if !moved_on {
            break;
        }
        current = m + 1;
    }

    Ok(AutoOutcome {
        segmentation: sets[current].clone(),
        selected: current,
        tau: grid[current],
        tau_grid: grid.clone(),
        set_sizes: sets.iter().map(Segmentation::len).collect(),
        steps,
    })
}

/// `grid` merged with the path's breakpoints strictly between its ends.
fn refine_grid(grid: &[f64], path: &NwbsPath) -> Vec<f64> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut out: Vec<f64> = grid.to_vec();
    out.extend(path.nodes().iter().map(|n| n.survives_below).filter(|&v| lo < v && v < hi));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Settings for the full pipeline: split, draw intervals, select, map back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoConfig {
    pub intervals: usize,
    pub max_len: Option<usize>,
    /// Defaults to `2 log(n_{1:T}) / 3` of the full data.
    pub lambda: Option<f64>,
    /// Defaults to [`default_tau_grid`] of the full data.
    pub tau_grid: Option<Vec<f64>>,
    pub split: SplitMode,
    pub rule: SelectionRule,
    /// See [`PenaltyConfig::refine`].
    pub refine: bool,
}

impl Default for AutoConfig {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            max_len: None,
            lambda: None,
            tau_grid: None,
            split: SplitMode::Auto,
            rule: SelectionRule::default(),
            refine: true,
        }
    }
}

impl AutoConfig {
    pub fn penalty(&self, total: usize) -> Result<PenaltyConfig> {
        PenaltyConfig::new(
            self.lambda.unwrap_or_else(|| default_lambda(total)),
            self.tau_grid.clone().unwrap_or_else(|| default_tau_grid(total)),
        )
        .map(|p| p.with_refine(self.refine))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoDetection {
    /// Change points on the original time scale.
    pub segmentation: Segmentation,
    pub split: SplitMode,
    pub penalty: PenaltyConfig,
    pub intervals: Vec<Interval>,
    pub outcome: AutoOutcome,
}

/// Splits `data`, draws intervals on the detection half and runs
/// [`nwbs_auto`]. Detected indices are mapped back to original times.
pub fn detect_auto<R: Rng + ?Sized>(
    data: &Dataset,
    config: &AutoConfig,
    rng: &mut R,
) -> Result<AutoDetection> {
    let penalty = config.penalty(data.total())?;
    let pair = split(data, config.split)?;
    let max_len = config.max_len.map(|cap| cap.min(pair.detect.len()));
    let intervals = sample_intervals(pair.detect.len(), config.intervals, max_len, rng)?;
    let outcome = nwbs_auto(&pair.evaluate, &pair.detect, &intervals, &penalty, config.rule)?;
    let segmentation = outcome.segmentation.map_times(|b| pair.to_original(b));
    Ok(AutoDetection { segmentation, split: pair.mode, penalty, intervals, outcome })
}
