// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo harness: generate, detect, score.
//!
//! Replicate `i` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `i`, first the dataset and then any detector randomness, so
//! results do not depend on how replicates are scheduled.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{Extended, abs_k_error, extended_median, hausdorff_one_sided};
use super::scenario::{ScenarioSpec, generate};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::segmentation::{Segmentation, nbs, nwbs, sample_intervals};
use crate::selection::{AutoConfig, DEFAULT_INTERVALS, detect_auto};

/// Detection method with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Detector {
    Nbs {
        tau: f64,
    },
    Nwbs {
        tau: f64,
        #[serde(default = "default_intervals")]
        intervals: usize,
        #[serde(default)]
        max_len: Option<usize>,
    },
    NwbsAuto(AutoConfig),
}

fn default_intervals() -> usize {
    DEFAULT_INTERVALS
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Nbs { .. } => "nbs",
            Detector::Nwbs { .. } => "nwbs",
            Detector::NwbsAuto(_) => "nwbs-auto",
        }
    }

    /// Runs on the full window `[1, T]`.
    pub fn run<R: Rng + ?Sized>(&self, data: &Dataset, rng: &mut R) -> Result<Segmentation> {
        let len = data.len();
        match self {
            _ if len < 2 => Ok(Segmentation::default()),
            Detector::Nbs { tau } => nbs(data, 1, len, *tau),
            Detector::Nwbs { tau, intervals, max_len } => {
                let cap = max_len.map(|c| c.min(len));
                let draws = sample_intervals(len, *intervals, cap, rng)?;
                nwbs(data, 1, len, &draws, *tau)
            }
            Detector::NwbsAuto(config) => Ok(detect_auto(data, config, rng)?.segmentation),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub index: usize,
    pub true_k: usize,
    pub est_k: usize,
    pub abs_k_error: usize,
    /// `d(estimate | truth)`.
    pub d_est_given_true: Extended,
    /// `d(truth | estimate)`.
    pub d_true_given_est: Extended,
    pub change_points: Vec<usize>,
    /// Detector error message, if the replicate failed.
    pub failure: Option<String>,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean_abs_k_error: f64,
    pub median_d_est_given_true: Extended,
    pub median_d_true_given_est: Extended,
    pub failures: usize,
}

impl Aggregates {
    pub fn from_replicates(replicates: &[Replicate]) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::Config("no replicates to aggregate".into()));
        }
        let errors: usize = replicates.iter().map(|r| r.abs_k_error).sum();
        let column = |f: fn(&Replicate) -> Extended| {
            extended_median(&replicates.iter().map(f).collect::<Vec<_>>()).expect("nonempty")
        };
        Ok(Self {
            mean_abs_k_error: errors as f64 / replicates.len() as f64,
            median_d_est_given_true: column(|r| r.d_est_given_true),
            median_d_true_given_est: column(|r| r.d_true_given_est),
            failures: replicates.iter().filter(|r| r.failure.is_some()).count(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: ScenarioSpec,
    pub detector: Detector,
    pub reps: usize,
    pub seed: u64,
    pub true_change_points: Vec<usize>,
    pub replicates: Vec<Replicate>,
    pub aggregates: Aggregates,
    pub wall_time_ms: f64,
}

/// Generator for replicate `index` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs one generate, detect, score cycle.
pub fn run_replicate(
    spec: &ScenarioSpec,
    detector: &Detector,
    seed: u64,
    index: usize,
) -> Result<Replicate> {
    let mut rng = replicate_rng(seed, index);
    let (data, truth) = generate(spec, &mut rng)?;
    let start = Instant::now();
    let (estimate, failure) = match detector.run(&data, &mut rng) {
        Ok(seg) => (seg.times(), None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Replicate {
        index,
        true_k: truth.len(),
        est_k: estimate.len(),
        abs_k_error: abs_k_error(truth.len(), estimate.len()),
        d_est_given_true: hausdorff_one_sided(&estimate, &truth),
        d_true_given_est: hausdorff_one_sided(&truth, &estimate),
        change_points: estimate,
        failure,
        wall_time_ms,
    })
}

/// Runs `reps` replicates in parallel on the current rayon pool.
pub fn run_monte_carlo(
    spec: &ScenarioSpec,
    detector: &Detector,
    reps: usize,
    seed: u64,
) -> Result<RunReport> {
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    spec.validate()?;
    let start = Instant::now();
    let replicates = (0..reps)
        .into_par_iter()
        .map(|i| run_replicate(spec, detector, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = Aggregates::from_replicates(&replicates)?;
    Ok(RunReport {
        spec: spec.clone(),
        detector: detector.clone(),
        reps,
        seed,
        true_change_points: spec.change_points(),
        replicates,
        aggregates,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
