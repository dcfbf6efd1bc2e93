// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation scenarios, localisation metrics and the Monte Carlo harness.

pub mod metrics;
pub mod monte_carlo;
pub mod scenario;

pub use metrics::{Extended, abs_k_error, extended_median, hausdorff_one_sided};
pub use monte_carlo::{Aggregates, Detector, Replicate, RunReport, run_monte_carlo, run_replicate};
pub use scenario::{SamplePolicy, Scenario, ScenarioSpec, SegmentLaw, generate};
