// SPDX-License-Identifier: MIT OR Apache-2.0

//! Python module `kscpd`.

use kscpd_core::evaluation::{
    self, Detector, SamplePolicy, Scenario, ScenarioSpec, hausdorff_one_sided, run_monte_carlo,
};
use kscpd_core::evaluation::monte_carlo::replicate_rng;
use kscpd_core::selection::{self, SelectionRule};
use kscpd_core::{AutoConfig, SplitMode};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kebab<T: serde::de::DeserializeOwned>(s: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(err)
}

/// Samples `Y_{t,i}`, one list of observations per time point.
#[pyclass(frozen, module = "kscpd")]
#[derive(Clone)]
pub struct Dataset {
    inner: kscpd_core::Dataset,
}

#[pymethods]
impl Dataset {
    #[new]
    fn new(samples: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: kscpd_core::Dataset::new(samples).map_err(err)? })
    }

    /// One observation per time point.
    #[staticmethod]
    fn from_series(series: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: kscpd_core::Dataset::from_series(&series).map_err(err)? })
    }

    #[getter]
    fn total(&self) -> usize {
        self.inner.total()
    }

    fn samples(&self) -> Vec<Vec<f64>> {
        self.inner.to_samples()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(T={}, n_total={})", self.inner.len(), self.inner.total())
    }
}

fn window(data: &Dataset, s: Option<usize>, e: Option<usize>) -> (usize, usize) {
    (s.unwrap_or(1), e.unwrap_or(data.inner.len()))
}

/// Maximum CUSUM KS statistic over the window `[s, e]`, or `None` when the
/// window has no split. Returns a dict with `value`, `t`, `z`.
#[pyfunction]
#[pyo3(signature = (data, s=None, e=None))]
fn max_cusum<'py>(
    py: Python<'py>,
    data: &Dataset,
    s: Option<usize>,
    e: Option<usize>,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let (s, e) = window(data, s, e);
    let Some(res) = kscpd_core::max_cusum(&data.inner, s, e).map_err(err)? else {
        return Ok(None);
    };
    let out = PyDict::new(py);
    out.set_item("value", res.value)?;
    out.set_item("t", res.argmax_t)?;
    out.set_item("z", res.argmax_z)?;
    Ok(Some(out))
}

#[pyfunction]
#[pyo3(signature = (data, s, e, t, z))]
fn cusum_ks(data: &Dataset, s: usize, e: usize, t: usize, z: f64) -> PyResult<f64> {
    kscpd_core::cusum_ks_at(&data.inner, s, e, t, z).map_err(err)
}

#[pyfunction]
fn nbs(data: &Dataset, tau: f64) -> PyResult<Vec<usize>> {
    let len = data.inner.len();
    Ok(kscpd_core::nbs(&data.inner, 1, len, tau).map_err(err)?.times())
}

/// `(alpha, beta)` pairs drawn uniformly on `1..=T`.
#[pyfunction]
#[pyo3(signature = (length, count, seed=0, max_len=None))]
fn sample_intervals(
    length: usize,
    count: usize,
    seed: u64,
    max_len: Option<usize>,
) -> PyResult<Vec<(usize, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ivs = kscpd_core::sample_intervals(length, count, max_len, &mut rng).map_err(err)?;
    Ok(ivs.into_iter().map(|iv| (iv.alpha, iv.beta)).collect())
}

/// NWBS at threshold `tau`. Pass `intervals` as pairs, or let `count`
/// intervals be drawn from `seed`.
#[pyfunction]
#[pyo3(signature = (data, tau, intervals=None, count=selection::DEFAULT_INTERVALS, seed=0))]
fn nwbs(
    data: &Dataset,
    tau: f64,
    intervals: Option<Vec<(usize, usize)>>,
    count: usize,
    seed: u64,
) -> PyResult<Vec<usize>> {
    let len = data.inner.len();
    let ivs = match intervals {
        Some(pairs) => pairs
            .into_iter()
            .map(|(a, b)| kscpd_core::Interval::new(a, b))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            kscpd_core::sample_intervals(len, count, None, &mut rng).map_err(err)?
        }
    };
    Ok(kscpd_core::nwbs(&data.inner, 1, len, &ivs, tau).map_err(err)?.times())
}

/// NWBS with the threshold chosen by sample splitting. Returns a dict with
/// `change_points`, `tau`, `lambda`, `tau_grid`, `set_sizes`, `split`.
#[pyfunction]
#[pyo3(signature = (
    data, seed=0, intervals=selection::DEFAULT_INTERVALS, max_len=None, lambda_=None,
    tau_grid=None, split="auto", rule="adaptive", refine=true,
))]
#[allow(clippy::too_many_arguments)]
fn detect<'py>(
    py: Python<'py>,
    data: &Dataset,
    seed: u64,
    intervals: usize,
    max_len: Option<usize>,
    lambda_: Option<f64>,
    tau_grid: Option<Vec<f64>>,
    split: &str,
    rule: &str,
    refine: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let config = AutoConfig {
        intervals,
        max_len,
        lambda: lambda_,
        tau_grid,
        split: kebab::<SplitMode>(split)?,
        rule: kebab::<SelectionRule>(rule)?,
        refine,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let det = selection::detect_auto(&data.inner, &config, &mut rng).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("change_points", det.segmentation.times())?;
    out.set_item("tau", det.outcome.tau)?;
    out.set_item("lambda", det.penalty.lambda)?;
    out.set_item("tau_grid", det.outcome.tau_grid.clone())?;
    out.set_item("set_sizes", det.outcome.set_sizes.clone())?;
    out.set_item("split", serde_json::to_value(det.split).map_err(err)?.as_str().map(str::to_owned))?;
    Ok(out)
}

/// Selection merge of two candidate sets at penalty `lambda_`.
#[pyfunction]
fn merge(data: &Dataset, first: Vec<usize>, second: Vec<usize>, lambda_: f64) -> PyResult<Vec<usize>> {
    let a = kscpd_core::Segmentation::from_times(first);
    let b = kscpd_core::Segmentation::from_times(second);
    let out = kscpd_core::update_merge(&data.inner, &a, &b, lambda_).map_err(err)?;
    Ok(out.segmentation.times())
}

/// One-sided Hausdorff distance `max_{o in outer} min_{i in inner} |i - o|`.
#[pyfunction]
fn hausdorff(inner: Vec<usize>, outer: Vec<usize>) -> f64 {
    hausdorff_one_sided(&inner, &outer).0
}

fn spec(scenario: &str, length: usize, n: &str) -> PyResult<ScenarioSpec> {
    let scenario = Scenario::from_id(scenario).map_err(err)?;
    let policy: SamplePolicy = n.parse().map_err(err)?;
    let spec = ScenarioSpec::new(scenario, length).with_policy(policy);
    spec.validate().map_err(err)?;
    Ok(spec)
}

/// Draws a scenario dataset; equals replicate 0 of `bench` with the same
/// seed. Returns `(dataset, true_change_points)`.
#[pyfunction]
#[pyo3(signature = (scenario, length=1000, n="1", seed=0))]
fn generate(scenario: &str, length: usize, n: &str, seed: u64) -> PyResult<(Dataset, Vec<usize>)> {
    let spec = spec(scenario, length, n)?;
    let (data, truth) = evaluation::generate(&spec, &mut replicate_rng(seed, 0)).map_err(err)?;
    Ok((Dataset { inner: data }, truth))
}

/// Monte Carlo run of the default `nwbs-auto` detector. Returns a dict
/// with the aggregates and per-replicate change points.
#[pyfunction]
#[pyo3(name = "bench", signature = (scenario, length=1000, n="1", reps=100, seed=0))]
fn run_bench<'py>(
    py: Python<'py>,
    scenario: &str,
    length: usize,
    n: &str,
    reps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = spec(scenario, length, n)?;
    let det = Detector::NwbsAuto(AutoConfig::default());
    let report = run_monte_carlo(&spec, &det, reps, seed).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("mean_abs_k_error", report.aggregates.mean_abs_k_error)?;
    out.set_item("median_d_est_given_true", report.aggregates.median_d_est_given_true.0)?;
    out.set_item("median_d_true_given_est", report.aggregates.median_d_true_given_est.0)?;
    out.set_item("true_change_points", report.true_change_points)?;
    let found: Vec<Vec<usize>> = report.replicates.into_iter().map(|r| r.change_points).collect();
    out.set_item("change_points", found)?;
    Ok(out)
}

#[pymodule]
fn kscpd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(max_cusum, m)?)?;
    m.add_function(wrap_pyfunction!(cusum_ks, m)?)?;
    m.add_function(wrap_pyfunction!(nbs, m)?)?;
    m.add_function(wrap_pyfunction!(nwbs, m)?)?;
    m.add_function(wrap_pyfunction!(sample_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(merge, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
