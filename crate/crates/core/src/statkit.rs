//! Small statistics toolkit: ECDFs, KS distances, Wilson intervals, fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Sample mean and unbiased variance. Variance is 0 for a single point.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Empirical CDF of a finite sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("sample contains NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted: samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }
}

/// Provenance of a tabulated distribution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CdfMeta {
    pub beta: Option<f64>,
    /// Boundary parameter; `None` stands for the Dirichlet case w = +∞.
    pub w: Option<f64>,
    pub method: String,
    pub paths: Option<usize>,
    pub grid_resolution: Option<f64>,
    pub seed: Option<u64>,
}

/// A monotone table of probabilities on an increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Confidence half-widths, present for Monte Carlo tables.
    pub ci_halfwidth: Option<Vec<f64>>,
    pub meta: CdfMeta,
}

impl CdfTable {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, meta: CdfMeta) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::invalid("grid and values must be nonempty and equal length"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("probabilities must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("cdf values must be non-decreasing"));
        }
        Ok(CdfTable {
            grid,
            values,
            ci_halfwidth: None,
            meta,
        })
    }

    /// Linear interpolation, constant beyond the ends of the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let n = g.len();
        if x <= g[0] {
            return self.values[0];
        }
        if x >= g[n - 1] {
            return self.values[n - 1];
        }
        let i = g.partition_point(|&s| s <= x) - 1;
        let s = (x - g[i]) / (g[i + 1] - g[i]);
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// Largest absolute difference with another table at this table's grid points.
    pub fn sup_deviation(&self, other: &CdfTable) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| (v - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// What an ECDF is compared with.
pub enum Reference<'a> {
    Sample(&'a Ecdf),
    Table(&'a CdfTable),
    Analytic(&'a dyn Fn(f64) -> f64),
}

pub fn ks_distance(a: &Ecdf, b: Reference<'_>) -> f64 {
    match b {
        Reference::Sample(b) => ks_two_sample(a, b),
        Reference::Table(t) => ks_against(a, |x| t.eval(x)),
        Reference::Analytic(f) => ks_against(a, f),
    }
}

/// Two-sample KS statistic, evaluated after all ties at each value.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let (xa, xb) = (a.samples(), b.samples());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_against(a: &Ecdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = a.samples();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    d
}

/// Counts of samples in `[edges[i], edges[i+1])`; the last bin is closed.
pub fn histogram(samples: &[f64], edges: &[f64]) -> Result<Vec<usize>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("histogram edges must be increasing, at least two"));
    }
    let last = *edges.last().unwrap();
    let mut counts = vec![0; edges.len() - 1];
    for &x in samples {
        if x < edges[0] || x > last {
            continue;
        }
        let k = if x == last {
            counts.len() - 1
        } else {
            edges.partition_point(|&e| e <= x) - 1
        };
        counts[k] += 1;
    }
    Ok(counts)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::invalid(format!(
            "wilson interval needs 0 <= successes <= trials, trials > 0 ({successes}/{trials})"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} outside (0, 1)")));
    }
    let z = normal_quantile(0.5 + 0.5 * level);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("linear_fit needs two equal-length inputs of length >= 2"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateInput("all x values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
    })
}
