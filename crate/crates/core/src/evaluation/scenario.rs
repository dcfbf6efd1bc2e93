// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation scenarios.
//!
//! Change points are evenly spaced, `eta_j = floor(j T / (K + 1))`, and split
//! `1..=T` into segments `A_1, ..., A_{K+1}` with `A_j = [eta_{j-1} + 1, eta_j]`.
//!
//! Random draws, in order, per time point: the count `n_t` (Poisson policy
//! only), then each observation. Normals use the ziggurat sampler of
//! `rand_distr::StandardNormal`; Student t variates are `Z / sqrt(V / nu)`
//! with `Z` standard normal and `V ~ ChiSquared(nu)` drawn in that order.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Distribution of one segment in a custom scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum SegmentLaw {
    Normal { mean: f64, sd: f64 },
    /// `loc + scale * t_df`.
    StudentT { df: f64, loc: f64, scale: f64 },
    Uniform { low: f64, high: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    #[serde(flatten)]
    pub law: SegmentLaw,
}

impl SegmentLaw {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            SegmentLaw::Normal { mean, sd } => mean.is_finite() && *sd > 0.0 && sd.is_finite(),
            SegmentLaw::StudentT { df, loc, scale } => {
                *df > 0.0 && loc.is_finite() && *scale > 0.0 && scale.is_finite()
            }
            SegmentLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            SegmentLaw::Mixture { components } => {
                !components.is_empty()
                    && components.iter().all(|c| c.weight >= 0.0 && c.weight.is_finite())
                    && components.iter().map(|c| c.weight).sum::<f64>() > 0.0
                    && components.iter().all(|c| c.law.validate().is_ok())
            }
        };
        if ok { Ok(()) } else { Err(Error::Config(format!("invalid segment law {self:?}"))) }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SegmentLaw::Normal { mean, sd } => mean + sd * standard_normal(rng),
            SegmentLaw::StudentT { df, loc, scale } => loc + scale * student_t(*df, rng),
            SegmentLaw::Uniform { low, high } => rng.random_range(*low..*high),
            SegmentLaw::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let mut u = rng.random::<f64>() * total;
                for c in components {
                    if u < c.weight {
                        return c.law.sample(rng);
                    }
                    u -= c.weight;
                }
                components.last().expect("validated nonempty").law.sample(rng)
            }
        }
    }
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Student t with `df` degrees of freedom.
pub fn student_t<R: Rng + ?Sized>(df: f64, rng: &mut R) -> f64 {
    let z = standard_normal(rng);
    let v: f64 = ChiSquared::new(df).expect("df > 0").sample(rng);
    z / (v / df).sqrt()
}

/// Number of observations per time point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplePolicy {
    Constant(usize),
    /// Poisson with this mean, raised to 1 when it draws 0.
    Poisson(f64),
}

impl Default for SamplePolicy {
    fn default() -> Self {
        SamplePolicy::Constant(1)
    }
}

impl SamplePolicy {
    fn validate(&self) -> Result<()> {
        match *self {
            SamplePolicy::Constant(0) => Err(Error::Config("constant n_t must be >= 1".into())),
            SamplePolicy::Poisson(mean) if !(mean > 0.0) || !mean.is_finite() => {
                Err(Error::Config(format!("Poisson mean must be positive, got {mean}")))
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            SamplePolicy::Constant(c) => c,
            SamplePolicy::Poisson(mean) => {
                let k: f64 = Poisson::new(mean).expect("validated mean").sample(rng);
                (k as usize).max(1)
            }
        }
    }
}

impl std::str::FromStr for SamplePolicy {
    type Err = Error;

    /// Accepts `5`, `const:5` or `poisson:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid sample policy {s:?}"));
        let policy = match s.split_once(':') {
            None => SamplePolicy::Constant(s.trim().parse().map_err(|_| bad())?),
            Some(("const" | "constant", v)) => {
                SamplePolicy::Constant(v.trim().parse().map_err(|_| bad())?)
            }
            Some(("poisson" | "pois", v)) => {
                SamplePolicy::Poisson(v.trim().parse().map_err(|_| bad())?)
            }
            Some(_) => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Generative model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum Scenario {
    /// Alternating mean 1 / 0 with `t_3 / sqrt(3)` noise and
    /// `K = floor(sqrt(T / (2 log T)))`.
    #[serde(rename = "2")]
    HeavyTailMean,
    /// Alternating mean 1 / 0 with standard normal noise, `K = 5`.
    #[serde(rename = "3")]
    GaussianMean,
    /// Standard deviation alternating 0.2 / 1 with zero mean, `K = 5`.
    #[serde(rename = "4")]
    Variance,
    /// Standard normal alternating with `t_{2.5}` rescaled to unit variance,
    /// `K = 2`.
    #[serde(rename = "5")]
    Shape,
    #[serde(rename = "custom")]
    Custom { change_points: Vec<usize>, segments: Vec<SegmentLaw> },
}

impl Scenario {
    /// Parses `"2"`..`"5"`. Scenario 1 is reported as unsupported.
    pub fn from_id(id: &str) -> Result<Self> {
        match id.trim() {
            "1" => Err(Error::Unsupported(
                "scenario 1 needs densities that are not available; use a custom scenario".into(),
            )),
            "2" => Ok(Scenario::HeavyTailMean),
            "3" => Ok(Scenario::GaussianMean),
            "4" => Ok(Scenario::Variance),
            "5" => Ok(Scenario::Shape),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Scenario::HeavyTailMean => "2",
            Scenario::GaussianMean => "3",
            Scenario::Variance => "4",
            Scenario::Shape => "5",
            Scenario::Custom { .. } => "custom",
        }
    }

    /// Number of change points for a series of length `len`.
    pub fn num_change_points(&self, len: usize) -> usize {
        match self {
            Scenario::HeavyTailMean => {
                let t = len as f64;
                (t / (2.0 * t.ln())).sqrt().floor() as usize
            }
            Scenario::GaussianMean | Scenario::Variance => 5,
            Scenario::Shape => 2,
            Scenario::Custom { change_points, .. } => change_points.len(),
        }
    }

    pub fn change_points(&self, len: usize) -> Vec<usize> {
        match self {
            Scenario::Custom { change_points, .. } => change_points.clone(),
            _ => evenly_spaced(len, self.num_change_points(len)),
        }
    }

    /// Law of segment `j` (1-based).
    fn law(&self, j: usize) -> SegmentLaw {
        let odd = j % 2 == 1;
        match self {
            Scenario::HeavyTailMean => SegmentLaw::StudentT {
                df: 3.0,
                loc: if odd { 1.0 } else { 0.0 },
                scale: 1.0 / 3f64.sqrt(),
            },
            Scenario::GaussianMean => {
                SegmentLaw::Normal { mean: if odd { 1.0 } else { 0.0 }, sd: 1.0 }
            }
            Scenario::Variance => SegmentLaw::Normal { mean: 0.0, sd: if odd { 0.2 } else { 1.0 } },
            Scenario::Shape if odd => SegmentLaw::Normal { mean: 0.0, sd: 1.0 },
            Scenario::Shape => SegmentLaw::StudentT {
                df: 2.5,
                loc: 0.0,
                scale: 1.0 / (2.5f64 / (2.5 - 2.0)).sqrt(),
            },
            Scenario::Custom { segments, .. } => segments[j - 1].clone(),
        }
    }
}

/// `floor(j len / (count + 1))` for `j = 1..=count`.
pub fn evenly_spaced(len: usize, count: usize) -> Vec<usize> {
    (1..=count).map(|j| j * len / (count + 1)).collect()
}

/// Everything needed to regenerate one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    #[serde(rename = "T")]
    pub length: usize,
    #[serde(default)]
    pub n_policy: SamplePolicy,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, length: usize) -> Self {
        Self { scenario, length, n_policy: SamplePolicy::Constant(1), seed: 0 }
    }

    pub fn with_policy(mut self, policy: SamplePolicy) -> Self {
        self.n_policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn change_points(&self) -> Vec<usize> {
        self.scenario.change_points(self.length)
    }

    /// Smallest gap between consecutive change points, counting `0` and `T`.
    pub fn min_spacing(&self) -> usize {
        let mut edges = vec![0];
        edges.extend(self.change_points());
        edges.push(self.length);
        edges.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(self.length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Config(format!("T must be >= 2, got {}", self.length)));
        }
        self.n_policy.validate()?;
        let cps = self.change_points();
        if cps.first().is_some_and(|&c| c == 0)
            || cps.last().is_some_and(|&c| c >= self.length)
            || cps.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(format!(
                "change points {cps:?} must be strictly increasing inside (0, {})",
                self.length
            )));
        }
        if let Scenario::Custom { change_points, segments } = &self.scenario {
            if segments.len() != change_points.len() + 1 {
                return Err(Error::Config(format!(
                    "{} change points need {} segment laws, got {}",
                    change_points.len(),
                    change_points.len() + 1,
                    segments.len()
                )));
            }
            segments.iter().try_for_each(SegmentLaw::validate)?;
        }
        Ok(())
    }
}

/// Draws a dataset from `spec` and returns it with the true change points.
pub fn generate<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let cps = spec.change_points();
    let mut samples = Vec::with_capacity(spec.length);
    let mut segment = 1;
    let mut law = spec.scenario.law(1);
    for t in 1..=spec.length {
        if segment <= cps.len() && t > cps[segment - 1] {
            segment += 1;
            law = spec.scenario.law(segment);
        }
        let n_t = spec.n_policy.draw(rng);
        samples.push((0..n_t).map(|_| law.sample(rng)).collect());
    }
    Ok((Dataset::new(samples)?, cps))
}
