// SPDX-License-Identifier: MIT OR Apache-2.0

//! Detection settings shared by `detect` and `bench`.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use kscpd_core::evaluation::Detector;
use kscpd_core::selection::{DEFAULT_INTERVALS, SelectionRule};
use kscpd_core::{AutoConfig, SplitMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nbs,
    Nwbs,
    #[default]
    NwbsAuto,
}

/// A fully resolved detection configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    /// Threshold for `nbs` and `nwbs`.
    pub tau: Option<f64>,
    /// Threshold grid for `nwbs-auto`.
    pub tau_grid: Option<Vec<f64>>,
    /// Selection penalty for `nwbs-auto`.
    pub lambda: Option<f64>,
    /// Number of random intervals `S`.
    pub intervals: usize,
    pub max_len: Option<usize>,
    pub seed: u64,
    pub split: SplitMode,
    pub rule: SelectionRule,
    pub refine: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::default(),
            tau: None,
            tau_grid: None,
            lambda: None,
            intervals: DEFAULT_INTERVALS,
            max_len: None,
            seed: 0,
            split: SplitMode::default(),
            rule: SelectionRule::default(),
            refine: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let config = |m: String| Err(CliError::Config(m));
        match self.method {
            Method::Nbs | Method::Nwbs => match self.tau {
                None => return config(format!("method {} needs --tau", self.method.name())),
                Some(t) if !(t > 0.0) || !t.is_finite() => {
                    return config(format!("tau must be positive and finite, got {t}"));
                }
                _ => {}
            },
            Method::NwbsAuto => {
                if self.tau.is_some() {
                    return config("nwbs-auto takes --tau-grid, not --tau".into());
                }
            }
        }
        if self.method != Method::Nbs && self.intervals == 0 {
            return config("the interval count must be >= 1".into());
        }
        if let Some(cap) = self.max_len {
            if cap < 2 {
                return config(format!("max interval length must be >= 2, got {cap}"));
            }
        }
        if self.method == Method::NwbsAuto {
            self.auto_config().penalty(2).map_err(CliError::Core)?;
        }
        Ok(())
    }

    pub fn auto_config(&self) -> AutoConfig {
        AutoConfig {
            intervals: self.intervals,
            max_len: self.max_len,
            lambda: self.lambda,
            tau_grid: self.tau_grid.clone(),
            split: self.split,
            rule: self.rule,
            refine: self.refine,
        }
    }

    pub fn detector(&self) -> CliResult<Detector> {
        self.validate()?;
        Ok(match self.method {
            Method::Nbs => Detector::Nbs { tau: self.tau.expect("validated") },
            Method::Nwbs => Detector::Nwbs {
                tau: self.tau.expect("validated"),
                intervals: self.intervals,
                max_len: self.max_len,
            },
            Method::NwbsAuto => Detector::NwbsAuto(self.auto_config()),
        })
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nbs => "nbs",
            Method::Nwbs => "nwbs",
            Method::NwbsAuto => "nwbs-auto",
        }
    }
}

/// Parses a kebab-case serde enum name.
fn kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn split_mode(s: &str) -> Result<SplitMode, String> {
    kebab(s)
}

fn rule(s: &str) -> Result<SelectionRule, String> {
    kebab(s)
}

/// Detection flags. Every flag overrides the matching field of `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// JSON file with a run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Detector [default: nwbs-auto].
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Threshold for nbs and nwbs.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Comma-separated increasing thresholds for nwbs-auto.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub tau_grid: Option<Vec<f64>>,
    /// Selection penalty [default: 2 ln(n_total) / 3].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of random intervals [default: 120].
    #[arg(long, short = 'S')]
    pub intervals: Option<usize>,
    /// Longest random interval, as beta - alpha.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Seed for every random draw [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample split for nwbs-auto: auto, time or within-time [default: auto].
    #[arg(long, value_parser = split_mode)]
    pub split: Option<SplitMode>,
    /// Selection rule for nwbs-auto: adaptive, smallest-candidate or strict
    /// [default: adaptive].
    #[arg(long, value_parser = rule)]
    pub rule: Option<SelectionRule>,
    /// Walk only the given threshold grid, without the path breakpoints.
    #[arg(long)]
    pub no_refine: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = crate::read_text(path)?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!(
                    "{}: {e}",
                    path.display()
                )))?
            }
            None => RunConfig::default(),
        };
        if let Some(m) = self.method {
            config.method = m;
        }
        if self.tau.is_some() {
            config.tau = self.tau;
        }
        if self.tau_grid.is_some() {
            config.tau_grid = self.tau_grid.clone();
        }
        if self.lambda.is_some() {
            config.lambda = self.lambda;
        }
        if let Some(s) = self.intervals {
            config.intervals = s;
        }
        if self.max_len.is_some() {
            config.max_len = self.max_len;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(split) = self.split {
            config.split = split;
        }
        if let Some(rule) = self.rule {
            config.rule = rule;
        }
        if self.no_refine {
            config.refine = false;
        }
        config.validate()?;
        Ok(config)
    }
}
