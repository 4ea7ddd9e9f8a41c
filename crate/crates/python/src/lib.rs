//! Python bindings. Report objects cross the boundary as plain dicts.

use homopolymer::acceptance;
use homopolymer::doob::{self, q_kernel};
use homopolymer::harmonic::{self, ModelParams};
use homopolymer::kernel::{self as core_kernel, BoxSpec};
use homopolymer::quadrature::QuadratureSpec;
use homopolymer::resolvent::{self as core_resolvent, SpectralParam};
use homopolymer::wetting::{self, WettingParams};
use homopolymer::Site;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: homopolymer::Error) -> PyErr {
    match e {
        homopolymer::Error::InvalidDimension(_)
        | homopolymer::Error::InvalidArgument(_)
        | homopolymer::Error::OnSpectrum(_)
        | homopolymer::Error::Config { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn site(x: Vec<i32>) -> PyResult<Site> {
    Site::new(&x).map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn quad(tol: Option<f64>) -> QuadratureSpec {
    tol.map(QuadratureSpec::with_tol).unwrap_or_default()
}

/// The positive harmonic function `ψ_β` together with `λ(β)` and the phase.
#[pyclass(name = "Harmonic", frozen)]
struct PyHarmonic {
    inner: harmonic::Harmonic,
}

#[pymethods]
impl PyHarmonic {
    #[new]
    #[pyo3(signature = (d, beta, quad_tol=None))]
    fn new(py: Python<'_>, d: usize, beta: f64, quad_tol: Option<f64>) -> PyResult<Self> {
        let q = quad(quad_tol);
        let params = py.detach(|| ModelParams::new(d, beta, &q)).map_err(err)?;
        Ok(PyHarmonic {
            inner: harmonic::Harmonic::new(params, q),
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.params().d
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.params().beta
    }

    #[getter]
    fn beta_cr(&self) -> f64 {
        self.inner.params().beta_cr
    }

    #[getter]
    fn lambda_beta(&self) -> f64 {
        self.inner.params().lambda_beta
    }

    #[getter]
    fn phase<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.params().phase)
    }

    fn psi(&self, py: Python<'_>, x: Vec<i32>) -> PyResult<f64> {
        let x = site(x)?;
        py.detach(|| self.inner.psi(&x)).map_err(err)
    }

    fn harmonic_residual(&self, py: Python<'_>, radius: i32) -> PyResult<f64> {
        py.detach(|| harmonic::harmonic_residual(&self.inner, radius)).map_err(err)
    }

    /// Jump rates of the transformed chain out of `x`, as `[(site, rate)]`.
    fn q_rates(&self, x: Vec<i32>) -> PyResult<Vec<(Vec<i32>, f64)>> {
        let table = doob::q_rates(&self.inner, &site(x)?).map_err(err)?;
        Ok(table.neighbor_rates.iter().map(|(y, r)| (y.coords().to_vec(), *r)).collect())
    }

    /// `q_β(t, x, ·)` on a box of the given radius.
    fn q_kernel<'py>(&self, py: Python<'py>, t: f64, x: Vec<i32>, radius: u32) -> PyResult<Bound<'py, PyAny>> {
        let x = site(x)?;
        let bx = BoxSpec::new(radius, self.inner.params().d).map_err(err)?;
        let q = py.detach(|| q_kernel(&self.inner, &bx, t, &x)).map_err(err)?;
        to_py(py, &q)
    }

    /// Summary of an `n`-path polymer ensemble at time `t`.
    #[pyo3(signature = (t, n, seed, ess_floor=0.0))]
    fn sample_polymer<'py>(&self, py: Python<'py>, t: f64, n: usize, seed: u64, ess_floor: f64) -> PyResult<Bound<'py, PyAny>> {
        let ens = py.detach(|| doob::sample_polymer(&self.inner, t, n, seed, &[], ess_floor)).map_err(err)?;
        let occupation = ens.mean(|r| r.summary.stats.occupation_time);
        let visits = ens.mean(|r| r.summary.stats.zero_visit_count as f64);
        let last_zero = ens.mean(|r| r.summary.stats.last_zero_time);
        let summary = serde_json::json!({
            "t": ens.t,
            "n": ens.runs.len(),
            "ess": ens.ess,
            "occupation_time": occupation,
            "zero_visits": visits,
            "last_zero_time": last_zero,
        });
        to_py(py, &summary)
    }
}

#[pyfunction]
#[pyo3(signature = (beta, d, quad_tol=None))]
fn lambda_of_beta(py: Python<'_>, beta: f64, d: usize, quad_tol: Option<f64>) -> PyResult<f64> {
    let q = quad(quad_tol);
    py.detach(|| harmonic::lambda_of_beta(beta, d, &q)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, quad_tol=None))]
fn beta_critical(py: Python<'_>, d: usize, quad_tol: Option<f64>) -> PyResult<f64> {
    let q = quad(quad_tol);
    py.detach(|| core_resolvent::beta_critical(d, &q)).map_err(err)
}

/// `R_λ(x, y)` for the free walk, or for `H_β` when `beta` is given.
#[pyfunction]
#[pyo3(signature = (lam, x, y, beta=None, quad_tol=None))]
fn resolvent(py: Python<'_>, lam: Complex64, x: Vec<i32>, y: Vec<i32>, beta: Option<f64>, quad_tol: Option<f64>) -> PyResult<Complex64> {
    let (x, y) = (site(x)?, site(y)?);
    let p = SpectralParam::new(lam).map_err(err)?;
    let q = quad(quad_tol);
    py.detach(|| match beta {
        Some(b) => core_resolvent::perturbed_resolvent(&p, b, &x, &y, &q),
        None => core_resolvent::free_resolvent(&p, &x, &y, &q),
    })
    .map_err(err)
}

/// `p_β(t, x, ·)` on a box, as a dict with `values` in row-major box order.
#[pyfunction]
#[pyo3(signature = (beta, t, x, radius=None))]
fn kernel<'py>(py: Python<'py>, beta: f64, t: f64, x: Vec<i32>, radius: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let x = site(x)?;
    let bx = BoxSpec::new(radius.unwrap_or_else(|| core_kernel::default_radius(t)), x.dim()).map_err(err)?;
    let g = py.detach(|| core_kernel::propagate(beta, &bx, t, &x)).map_err(err)?;
    to_py(py, &g)
}

/// `Z_{β,t}(x)` with its truncation bound.
#[pyfunction]
#[pyo3(signature = (beta, t, x, radius=None))]
fn partition_function(py: Python<'_>, beta: f64, t: f64, x: Vec<i32>, radius: Option<u32>) -> PyResult<(f64, f64)> {
    let x = site(x)?;
    let bx = BoxSpec::new(radius.unwrap_or_else(|| core_kernel::default_radius(t)), x.dim()).map_err(err)?;
    let z = py.detach(|| core_kernel::partition_function(beta, &bx, t, &x)).map_err(err)?;
    Ok((z.value, z.truncation_error_bound))
}

/// Wetting kernel on `[0, l]` started from `x`.
#[pyfunction]
fn wetting_kernel<'py>(py: Python<'py>, beta_prime: f64, l: i32, t: f64, x: i32) -> PyResult<Bound<'py, PyAny>> {
    let p = WettingParams::new(beta_prime).map_err(err)?;
    let g = py.detach(|| wetting::wetting_kernel(&p, l, t, x)).map_err(err)?;
    to_py(py, &g)
}

#[pyfunction]
fn wetting_identity_check<'py>(py: Python<'py>, beta_prime: f64, t: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = WettingParams::new(beta_prime).map_err(err)?;
    let r = py.detach(|| wetting::wetting_identity_check(&p, t)).map_err(err)?;
    to_py(py, &r)
}

/// Runs one acceptance criterion (1 to 11) and returns its outcome.
#[pyfunction]
fn run_criterion<'py>(py: Python<'py>, id: u8) -> PyResult<Bound<'py, PyAny>> {
    let out = py
        .detach(|| acceptance::run_criterion(id))
        .ok_or_else(|| PyValueError::new_err(format!("no criterion {id}")))?;
    to_py(py, &out)
}

#[pymodule]
fn homopolymer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHarmonic>()?;
    m.add_function(wrap_pyfunction!(lambda_of_beta, m)?)?;
    m.add_function(wrap_pyfunction!(beta_critical, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(partition_function, m)?)?;
    m.add_function(wrap_pyfunction!(wetting_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(wetting_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
