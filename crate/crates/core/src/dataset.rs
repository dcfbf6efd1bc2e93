// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ragged univariate series: `n_t >= 1` real observations at every time point.

use crate::error::{Error, Result};

/// Observations `Y_{t,i}` for `t = 1..=T`, `i = 1..=n_t`.
///
/// Values are stored in one flat buffer in time order, so the observations of
/// any window `[s, e]` form a contiguous slice. Each observation also carries
/// its dense rank among the distinct values of the whole series; the CUSUM
/// kernel works on these ranks only.
#[derive(Clone, Debug)]
pub struct Dataset {
    values: Vec<f64>,
    /// `offsets[t] = n_{1:t}`, with `offsets[0] = 0`.
    offsets: Vec<usize>,
    ranks: Vec<u32>,
    distinct: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from per-time observation lists.
    ///
    /// Fails when the series is empty, a time point has no observations, or a
    /// value is not finite. `-0.0` is stored as `0.0`.
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidData("series must contain at least one time point".into()));
        }
        let total: usize = samples.iter().map(Vec::len).sum();
        if total >= u32::MAX as usize {
            return Err(Error::InvalidData(format!("too many observations: {total}")));
        }
        let mut values = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(samples.len() + 1);
        offsets.push(0);
        for (idx, obs) in samples.into_iter().enumerate() {
            if obs.is_empty() {
                return Err(Error::InvalidData(format!("time point {} has no observations", idx + 1)));
            }
            for v in obs {
                if !v.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "non-finite observation {v} at time {}",
                        idx + 1
                    )));
                }
                values.push(v + 0.0);
            }
            offsets.push(values.len());
        }

        let mut distinct = values.clone();
        distinct.sort_unstable_by(f64::total_cmp);
        distinct.dedup();
        let ranks = values
            .iter()
            .map(|v| distinct.partition_point(|d| d < v) as u32)
            .collect();

        Ok(Self { values, offsets, ranks, distinct })
    }

    /// Single observation per time point.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        Self::new(series.iter().map(|&v| vec![v]).collect())
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Always false: a dataset holds at least one time point.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total number of observations `n_{1:T}`.
    pub fn total(&self) -> usize {
        self.values.len()
    }

    /// `n_t` for a 1-based time index.
    pub fn count(&self, t: usize) -> usize {
        self.offsets[t] - self.offsets[t - 1]
    }

    /// `n_{s:e}`; zero when `s > e`.
    pub fn count_range(&self, s: usize, e: usize) -> usize {
        if s > e { 0 } else { self.offsets[e] - self.offsets[s - 1] }
    }

    pub fn observations(&self, t: usize) -> &[f64] {
        &self.values[self.offsets[t - 1]..self.offsets[t]]
    }

    /// Observations of times `s..=e`, flattened in time order.
    pub fn window_values(&self, s: usize, e: usize) -> &[f64] {
        &self.values[self.offsets[s - 1]..self.offsets[e]]
    }

    pub(crate) fn window_ranks(&self, s: usize, e: usize) -> &[u32] {
        &self.ranks[self.offsets[s - 1]..self.offsets[e]]
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub(crate) fn value_of_rank(&self, rank: u32) -> f64 {
        self.distinct[rank as usize]
    }

    pub fn min_count(&self) -> usize {
        (1..=self.len()).map(|t| self.count(t)).min().unwrap_or(0)
    }

    pub fn max_count(&self) -> usize {
        (1..=self.len()).map(|t| self.count(t)).max().unwrap_or(0)
    }

    /// Copies the observations back out as per-time lists.
    pub fn to_samples(&self) -> Vec<Vec<f64>> {
        (1..=self.len()).map(|t| self.observations(t).to_vec()).collect()
    }

    /// Applies `f` to every observation. The result is validated like any
    /// other input.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            (1..=self.len())
                .map(|t| self.observations(t).iter().map(|&v| f(v)).collect())
                .collect(),
        )
    }

    /// Checks `1 <= s <= e <= T`.
    pub(crate) fn check_range(&self, s: usize, e: usize) -> Result<()> {
        if s == 0 || s > e || e > self.len() {
            return Err(Error::Bounds(format!(
                "window [{s}, {e}] is not inside [1, {}]",
                self.len()
            )));
        }
        Ok(())
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
