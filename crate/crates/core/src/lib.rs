// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline nonparametric change-point detection for univariate series with
//! one or more observations per time point.
//!
//! The detectors are built on the CUSUM Kolmogorov-Smirnov statistic
//! ([`kernel::max_cusum`]): binary segmentation ([`segmentation::nbs`]),
//! wild binary segmentation ([`segmentation::nwbs`]) and a sample-splitting
//! threshold selector ([`selection::nwbs_auto`]). [`evaluation`] holds the
//! simulation scenarios, the localisation metrics and a Monte Carlo harness.
//!
//! Time indices are 1-based throughout. A reported change point `b` is the
//! last index of the left segment: the distribution changes at `b + 1`.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod kernel;
pub mod segmentation;
pub mod selection;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use kernel::{CusumResult, cusum_ks_at, empirical_cdf, max_cusum};
pub use segmentation::{ChangePoint, Interval, Segmentation, nbs, nwbs, sample_intervals};
pub use selection::{AutoConfig, PenaltyConfig, SplitMode, SplitPair, nwbs_auto, update_merge};
