//! Python bindings: samplers, spectra, Tracy-Widom tables, carousel Monte Carlo
//! and the verification checks. Seeds are Python ints (u64).

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rmtlab::airy::{riccati_tw_cdf, Boundary};
use rmtlab::carousel::{gap_probability, parallel_counts, CarouselConfig, Driver};
use rmtlab::ensembles::{sample_beta_hermite as hermite, sample_circular_beta, SymTridiagonal};
use rmtlab::painleve;
use rmtlab::stochastics::RngStream;
use rmtlab::tridiag;
use rmtlab::verify::{run_criterion, Scale};
use rmtlab::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::OutOfRange(_) | Error::DegenerateInput(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn jacobi(diag: Vec<f64>, offdiag: Vec<f64>) -> PyResult<SymTridiagonal> {
    SymTridiagonal::new(diag, offdiag).map_err(to_py)
}

/// One β-Hermite draw as (diagonal, off-diagonal).
#[pyfunction]
#[pyo3(signature = (n, beta, seed=0))]
fn sample_beta_hermite(n: usize, beta: f64, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let t = hermite(n, beta, &mut RngStream::new(seed, 0)).map_err(to_py)?;
    Ok((t.diag, t.offdiag))
}

/// Eigenvalues of a symmetric tridiagonal matrix, ascending.
#[pyfunction]
#[pyo3(signature = (diag, offdiag, tol=1e-12))]
fn eigenvalues(diag: Vec<f64>, offdiag: Vec<f64>, tol: f64) -> PyResult<Vec<f64>> {
    tridiag::eigenvalues(&jacobi(diag, offdiag)?, tol).map_err(to_py)
}

/// Spectral measure at the first coordinate as [(location, weight)].
#[pyfunction]
#[pyo3(signature = (diag, offdiag, tol=1e-12))]
fn spectral_measure(diag: Vec<f64>, offdiag: Vec<f64>, tol: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(tridiag::spectral_measure(&jacobi(diag, offdiag)?, tol).map_err(to_py)?.atoms)
}

/// Tracy-Widom β=2 distribution function.
#[pyfunction]
fn tw2_cdf(t: f64) -> PyResult<f64> {
    painleve::tw2_cdf(t).map_err(to_py)
}

/// Law of the top eigenvalue with boundary parameter w (β=2).
#[pyfunction]
fn deformed_tw(t: f64, w: f64) -> PyResult<f64> {
    painleve::deformed_tw(t, w).map_err(to_py)
}

/// Riccati Monte Carlo of P(TW_β ≤ a) on `grid`; `w=None` is Dirichlet.
/// Returns (values, ci_halfwidths).
#[pyfunction]
#[pyo3(signature = (beta, grid, paths, seed=0, w=None))]
fn riccati_cdf(
    py: Python<'_>,
    beta: f64,
    grid: Vec<f64>,
    paths: usize,
    seed: u64,
    w: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let boundary = w.map_or(Boundary::Dirichlet, Boundary::Robin);
    let t = py
        .detach(|| riccati_tw_cdf(beta, boundary, &grid, paths, &RngStream::new(seed, 0)))
        .map_err(to_py)?;
    Ok((t.values, t.ci_halfwidth.unwrap_or_default()))
}

/// Sine_β counts N[0, λ] for `paths` carousel runs.
#[pyfunction]
#[pyo3(signature = (beta, lam, paths, seed=0))]
fn sine_counts(py: Python<'_>, beta: f64, lam: f64, paths: usize, seed: u64) -> PyResult<Vec<u64>> {
    let runs = py
        .detach(|| {
            parallel_counts(
                &[lam],
                Driver::SineBeta(beta),
                &CarouselConfig::default(),
                paths,
                &RngStream::new(seed, 0),
            )
        })
        .map_err(to_py)?;
    Ok(runs.iter().map(|r| r[0].count).collect())
}

/// Monte Carlo P(N[0, λ] = 0) with its Wilson interval: (p, lo, hi).
#[pyfunction]
#[pyo3(signature = (beta, lam, paths, seed=0))]
fn gap(py: Python<'_>, beta: f64, lam: f64, paths: usize, seed: u64) -> PyResult<(f64, f64, f64)> {
    let r = py
        .detach(|| gap_probability(beta, lam, 0, paths, &RngStream::new(seed, 0)))
        .map_err(to_py)?;
    Ok((r.mc_estimate, r.ci.0, r.ci.1))
}

/// Eigenangles in [0, 2π) of one circular β draw.
#[pyfunction]
#[pyo3(signature = (n, beta, seed=0))]
fn circular_eigenangles(n: usize, beta: f64, seed: u64) -> PyResult<Vec<f64>> {
    let alpha = sample_circular_beta(n, beta, &mut RngStream::new(seed, 0)).map_err(to_py)?;
    rmtlab::szego::eigenangles(&alpha, 1e-12).map_err(to_py)
}

/// Runs one verification criterion; returns a dict with passed, detail, metrics.
#[pyfunction]
#[pyo3(signature = (criterion, quick=true, seed=0))]
fn verify<'py>(py: Python<'py>, criterion: u32, quick: bool, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    let r = py.detach(|| run_criterion(criterion, scale, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("id", r.id)?;
    d.set_item("name", r.name)?;
    d.set_item("passed", r.passed)?;
    d.set_item("detail", r.detail)?;
    d.set_item("metrics", r.metrics.into_iter().collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule(name = "rmtlab")]
fn rmtlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(sample_beta_hermite, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_measure, m)?)?;
    m.add_function(wrap_pyfunction!(tw2_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(deformed_tw, m)?)?;
    m.add_function(wrap_pyfunction!(riccati_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(sine_counts, m)?)?;
    m.add_function(wrap_pyfunction!(gap, m)?)?;
    m.add_function(wrap_pyfunction!(circular_eigenangles, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
