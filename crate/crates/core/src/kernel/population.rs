// SPDX-License-Identifier: MIT OR Apache-2.0

//! Population CUSUM: the statistic evaluated on the true CDFs, with each
//! time point's CDF weighted by its observation count.

use super::CusumResult;
use crate::error::{Error, Result};

/// A distribution function evaluable at any real point.
pub trait Cdf {
    fn cdf(&self, z: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, z: f64) -> f64 {
        self(z)
    }
}

/// CDF of a finitely supported distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct StepCdf {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCdf {
    /// Builds the CDF from `(location, mass)` atoms. Masses must be
    /// nonnegative and are normalised to sum to one.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(x, w)| !x.is_finite() || !w.is_finite() || w < 0.0) {
            return Err(Error::Domain("atoms need finite locations and nonnegative masses".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if total <= 0.0 {
            return Err(Error::Domain("atoms carry no mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut cumulative: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (x, w) in atoms {
            acc += w / total;
            if knots.last() == Some(&x) {
                *cumulative.last_mut().unwrap() = acc;
            } else {
                knots.push(x);
                cumulative.push(acc);
            }
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { knots, cumulative })
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self { knots: vec![x], cumulative: vec![1.0] }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

impl Cdf for StepCdf {
    fn cdf(&self, z: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= z) {
            0 => 0.0,
            i => self.cumulative[i - 1],
        }
    }
}

fn check_window(len: usize, s: usize, e: usize) -> Result<()> {
    if s == 0 || s > e || e > len {
        return Err(Error::Bounds(format!("window [{s}, {e}] is not inside [1, {len}]")));
    }
    Ok(())
}

/// Signed population statistic for split `t` of window `[s, e]` at `z`.
///
/// `series[t - 1]` holds `(n_t, F_t)`.
pub fn population_cusum<C: Cdf>(
    series: &[(f64, C)],
    s: usize,
    e: usize,
    t: usize,
    z: f64,
) -> Result<f64> {
    check_window(series.len(), s, e)?;
    if t < s || t >= e {
        return Err(Error::Domain(format!("split {t} must satisfy {s} <= t < {e}")));
    }
    let mix = |a: usize, b: usize| {
        let (mut w, mut f) = (0.0, 0.0);
        for (n, cdf) in &series[a - 1..b] {
            w += n;
            f += n * cdf.cdf(z);
        }
        (w, f / w)
    };
    let (nl, fl) = mix(s, t);
    let (nr, fr) = mix(t + 1, e);
    Ok((nl * nr / (nl + nr)).sqrt() * (fl - fr))
}

/// Maximises the population statistic over `s < t < e` and `z` in `grid`.
///
/// The supremum over the real line is only attained on the grid when it
/// contains every knot of the CDFs. Returns `Ok(None)` for windows with no
/// interior split; ties go to the smallest `t`, then the smallest `z`.
pub fn population_max<C: Cdf>(
    series: &[(f64, C)],
    s: usize,
    e: usize,
    grid: &[f64],
) -> Result<Option<CusumResult>> {
    check_window(series.len(), s, e)?;
    if grid.is_empty() {
        return Err(Error::Domain("evaluation grid is empty".into()));
    }
    if series[s - 1..e].iter().any(|(n, _)| !(*n > 0.0)) {
        return Err(Error::Domain("weights must be positive".into()));
    }
    if e - s < 2 {
        return Ok(None);
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // Weighted CDF mass per time and grid point, then prefix sums over time.
    let width = e - s + 1;
    let mut mass = vec![0.0; grid.len()];
    let mut left_mass = vec![vec![0.0; grid.len()]; width];
    let mut left_weight = vec![0.0; width];
    let mut weight = 0.0;
    for (k, (n, cdf)) in series[s - 1..e].iter().enumerate() {
        weight += n;
        for (g, &z) in grid.iter().enumerate() {
            mass[g] += n * cdf.cdf(z);
        }
        left_mass[k].copy_from_slice(&mass);
        left_weight[k] = weight;
    }

    let mut best: Option<CusumResult> = None;
    for t in s + 1..e {
        let k = t - s;
        let nl = left_weight[k];
        let nr = weight - nl;
        let scale = (nl * nr / weight).sqrt();
        for (g, &z) in grid.iter().enumerate() {
            let fl = left_mass[k][g] / nl;
            let fr = (mass[g] - left_mass[k][g]) / nr;
            let value = (scale * (fl - fr)).abs();
            if best.is_none_or(|b| value > b.value) {
                best = Some(CusumResult { value, argmax_t: t, argmax_z: z, window: (s, e) });
            }
        }
    }
    Ok(best)
}
