// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sorted sweeps over one window.
//!
//! The window's observations are rank-compressed once. A sweep then moves
//! the split `t` left to right, adding the observations of time `t` to the
//! left-side counters and taking the supremum over the distinct values.

use super::kinetic::KineticMax;
use super::{SplitCandidate, beats};
use crate::dataset::Dataset;

/// Work ratio above which the kinetic sweep beats the dense one. Measured on
/// continuous data with 1 to 16 observations per time point; the crossover
/// sat between 2.5 and 3.
const KINETIC_WORK_RATIO: usize = 3;

pub(crate) struct Window {
    s: usize,
    e: usize,
    /// Sorted distinct global ranks present in the window.
    distinct: Vec<u32>,
    /// Local rank of every observation, in time order.
    local: Vec<u32>,
    /// Start of each time point's observations in `local`, plus the end.
    bounds: Vec<usize>,
}

impl Window {
    pub(crate) fn new(data: &Dataset, s: usize, e: usize) -> Self {
        let ranks = data.window_ranks(s, e);
        let mut distinct = ranks.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let local = ranks
            .iter()
            .map(|r| distinct.binary_search(r).expect("rank present") as u32)
            .collect();
        let base = data.offsets()[s - 1];
        let bounds = data.offsets()[s - 1..=e].iter().map(|o| o - base).collect();
        Self { s, e, distinct, local, bounds }
    }

    pub(crate) fn total(&self) -> usize {
        self.local.len()
    }

    pub(crate) fn global_rank(&self, local: usize) -> u32 {
        self.distinct[local]
    }

    fn items(&self, t: usize) -> &[u32] {
        let k = t - self.s;
        &self.local[self.bounds[k]..self.bounds[k + 1]]
    }

    fn totals(&self) -> Vec<u64> {
        let mut tot = vec![0u64; self.distinct.len()];
        for &r in &self.local {
            tot[r as usize] += 1;
        }
        tot
    }

    pub(crate) fn prefers_kinetic(&self) -> bool {
        let d = self.distinct.len();
        let log = (usize::BITS - d.leading_zeros()) as usize;
        (self.e - self.s) * d > KINETIC_WORK_RATIO * self.total() * log * log
    }

    pub(crate) fn scan_dense(&self) -> SplitCandidate {
        let n = self.total();
        let d = self.distinct.len();
        let tot = self.totals();
        let mut left = vec![0u64; d];
        let mut nl = 0usize;
        for &r in self.items(self.s) {
            left[r as usize] += 1;
        }
        nl += self.items(self.s).len();

        let mut best: Option<SplitCandidate> = None;
        let n_i = n as i64;
        for t in self.s + 1..self.e {
            for &r in self.items(t) {
                left[r as usize] += 1;
            }
            nl += self.items(t).len();
            let nl_i = nl as i64;
            let (mut cl, mut c) = (0i64, 0i64);
            let (mut top, mut top_j) = (0u64, 0usize);
            // The last distinct value always gives a zero numerator.
            for j in 0..d - 1 {
                cl += left[j] as i64;
                c += tot[j] as i64;
                let a = (n_i * cl - nl_i * c).unsigned_abs();
                if a > top {
                    top = a;
                    top_j = j;
                }
            }
            let cand = SplitCandidate { t, z_local: top_j, numerator: top, left: nl };
            if best.as_ref().is_none_or(|b| beats(&cand, b, n)) {
                best = Some(cand);
            }
        }
        best.expect("window has at least one split")
    }

    pub(crate) fn scan_kinetic(&self) -> SplitCandidate {
        let n = self.total();
        let tot = self.totals();
        let mut cum = 0i64;
        let slopes: Vec<i64> = tot
            .iter()
            .map(|&c| {
                cum += c as i64;
                cum
            })
            .collect();
        let d = slopes.len();
        let n_i = n as i64;
        // upper tracks max_j (n cl_j - nl C_j), lower tracks max_j (nl C_j - n cl_j).
        let mut upper = KineticMax::new(slopes.iter().map(|&c| -c).collect());
        let mut lower = KineticMax::new(slopes);

        let mut nl = 0usize;
        let mut best: Option<SplitCandidate> = None;
        for t in self.s..self.e {
            for &r in self.items(t) {
                upper.add(r as usize, d, n_i);
                lower.add(r as usize, d, -n_i);
            }
            nl += self.items(t).len();
            upper.advance(nl as i64);
            lower.advance(nl as i64);
            if t == self.s {
                continue;
            }
            let (v_up, j_up) = upper.max();
            let (v_lo, j_lo) = lower.max();
            let (top, top_j) = match v_up.cmp(&v_lo) {
                std::cmp::Ordering::Greater => (v_up, j_up),
                std::cmp::Ordering::Less => (v_lo, j_lo),
                std::cmp::Ordering::Equal => (v_up, j_up.min(j_lo)),
            };
            let cand = SplitCandidate { t, z_local: top_j, numerator: top as u64, left: nl };
            if best.as_ref().is_none_or(|b| beats(&cand, b, n)) {
                best = Some(cand);
            }
        }
        best.expect("window has at least one split")
    }
}
