//! Python bindings for `pairspace`.
//!
//! Structured results (reports, records) cross the boundary as JSON and come
//! out as plain Python dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use pairspace::configspace::{self, OrderedPair};
use pairspace::equivalence::{self, CompareOptions, Observable};
use pairspace::expansion::{self, BasisSpec, CoeffKey, RadialBasis};
use pairspace::harmonics::{self, AngularIndex, EulerAngles};
use pairspace::{cli, continuity, rotation, Error, Vec3};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn a3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Wave function expanded over oscillator radial functions and spherical
/// harmonics of the relative direction.
#[pyclass(name = "WaveExpansion", module = "pairspace_py", frozen)]
struct PyWaveExpansion {
    inner: expansion::WaveExpansion,
}

#[pymethods]
impl PyWaveExpansion {
    /// `coeffs` is a list of `(l, m, n, complex)`; the basis is the smallest
    /// one holding them.
    #[new]
    #[pyo3(signature = (coeffs, scale = 1.0))]
    fn new(coeffs: Vec<(u32, i32, usize, Complex64)>, scale: f64) -> PyResult<Self> {
        let records: Vec<expansion::CoefficientRecord> = coeffs
            .into_iter()
            .map(|(l, m, n, c)| expansion::CoefficientRecord { l, m, n, re: c.re, im: c.im })
            .collect();
        Ok(Self {
            inner: expansion::WaveExpansion::from_records(&records, scale).map_err(err)?,
        })
    }

    /// Projection of `(x + iy) e^{-r^2}` onto all degrees up to `l_max`.
    #[staticmethod]
    #[pyo3(signature = (l_max = 3, n_max = 2))]
    fn gaussian_dipole(l_max: u32, n_max: usize) -> PyResult<Self> {
        let spec = BasisSpec::full(l_max, RadialBasis::new(n_max, expansion::GAUSSIAN_DIPOLE_SCALE).map_err(err)?);
        Ok(Self {
            inner: expansion::project(&expansion::gaussian_dipole_polar, &spec).expansion,
        })
    }

    fn evaluate(&self, r: f64, theta: f64, phi: f64) -> Complex64 {
        self.inner.evaluate(r, theta, phi)
    }

    /// Value at the unordered pair whose labelled difference is `v`.
    fn evaluate_unordered(&self, v: [f64; 3]) -> Complex64 {
        self.inner.evaluate_unordered(&v3(v))
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// `"even"`, `"odd"` or `"mixed"`.
    fn exchange_parity(&self) -> &'static str {
        match expansion::conventional_exchange_parity(&self.inner) {
            expansion::ExchangeParity::Even => "even",
            expansion::ExchangeParity::Odd => "odd",
            expansion::ExchangeParity::Mixed => "mixed",
        }
    }

    #[pyo3(signature = (samples = 16))]
    fn seam_residual(&self, samples: usize) -> PyResult<f64> {
        continuity::seam_residual(&self.inner, samples).map_err(err)
    }

    #[pyo3(signature = (direction, eps = 1e-10))]
    fn phase_consistency(&self, py: Python<'_>, direction: [f64; 3], eps: f64) -> PyResult<Py<PyAny>> {
        let out = rotation::phase_consistency(&self.inner, &v3(direction), eps).map_err(err)?;
        to_py(py, &out)
    }

    fn coefficients(&self) -> Vec<(u32, i32, usize, Complex64)> {
        self.inner
            .coeffs()
            .iter()
            .map(|(k, c): (&CoeffKey, &Complex64)| (k.index.l(), k.index.m(), k.n, *c))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("WaveExpansion({} coefficients, norm {:.6})", self.inner.coeffs().len(), self.inner.norm())
    }
}

/// `(center, rel)` of the unordered pair `{r1, r2}`.
#[pyfunction]
fn canonicalize(r1: [f64; 3], r2: [f64; 3]) -> PyResult<([f64; 3], [f64; 3])> {
    let c = configspace::canonicalize(&OrderedPair::new(v3(r1), v3(r2))).map_err(err)?;
    Ok((a3(&c.center), a3(c.rel.as_vec())))
}

/// `(r1, r2)` from center of mass and a relative vector in the half-space.
#[pyfunction]
fn invert(center: [f64; 3], rel: [f64; 3]) -> PyResult<([f64; 3], [f64; 3])> {
    let c = configspace::PairCoords::new(v3(center), v3(rel)).map_err(err)?;
    let p = configspace::invert(&c);
    Ok((a3(&p.r1), a3(&p.r2)))
}

#[pyfunction]
fn in_domain(v: [f64; 3]) -> bool {
    configspace::in_domain(&v3(v))
}

#[pyfunction]
fn ylm(l: u32, m: i32, theta: f64, phi: f64) -> PyResult<Complex64> {
    harmonics::ylm(l, m, theta, phi).map_err(err)
}

/// Rows and columns indexed by `m' + l` and `m + l`.
#[pyfunction]
fn wigner_small_d(l: u32, beta: f64) -> Vec<Vec<f64>> {
    let d = harmonics::wigner_small_d(l, beta);
    d.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Seam-constraint analysis of the odd-l space up to `l_max`.
#[pyfunction]
#[pyo3(signature = (l_max, n_max = 1))]
fn fermion_exclusion_report(py: Python<'_>, l_max: u32, n_max: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &continuity::fermion_exclusion_report(l_max, n_max).map_err(err)?)
}

/// Seam-constraint analysis of every degree up to `l_max`.
#[pyfunction]
#[pyo3(signature = (l_max, n_max = 1, svd_tol = continuity::DEFAULT_SVD_TOL))]
fn constraint_report(py: Python<'_>, l_max: u32, n_max: usize, svd_tol: f64) -> PyResult<Py<PyAny>> {
    let spec = BasisSpec::full(l_max, RadialBasis::unit(n_max).map_err(err)?);
    to_py(py, &continuity::constraint_report(&spec, svd_tol).map_err(err)?)
}

/// Closure defect of the angular index set under one z-y-z rotation.
#[pyfunction]
fn closure_defect(indices: Vec<(u32, i32)>, alpha: f64, beta: f64, gamma: f64) -> PyResult<f64> {
    let idx = indices
        .into_iter()
        .map(|(l, m)| AngularIndex::new(l, m))
        .collect::<pairspace::Result<Vec<_>>>()
        .map_err(err)?;
    let spec = BasisSpec::new(idx, RadialBasis::unit(1).map_err(err)?).map_err(err)?;
    rotation::closure_defect(&spec, &EulerAngles::new(alpha, beta, gamma)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (l_max, trials = 50, seed = rotation::DEFAULT_SEED))]
fn mixed_symmetry_exclusion(py: Python<'_>, l_max: u32, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &rotation::mixed_symmetry_exclusion(l_max, trials, seed).map_err(err)?)
}

/// Half-space against full-space matrix element of a built-in observable
/// (`identity`, `r_squared`, `gaussian_well`).
#[pyfunction]
#[pyo3(signature = (w1, w2, observable = "identity", renormalize = true))]
fn matrix_element_compare(
    py: Python<'_>,
    w1: &PyWaveExpansion,
    w2: &PyWaveExpansion,
    observable: &str,
    renormalize: bool,
) -> PyResult<Py<PyAny>> {
    let obs = Observable::builtin(observable)
        .ok_or_else(|| PyValueError::new_err(format!("unknown observable {observable:?}")))?;
    let opts = CompareOptions { renormalize, ..CompareOptions::default() };
    to_py(py, &equivalence::matrix_element_compare_with(&w1.inner, &w2.inner, &obs, opts).map_err(err)?)
}

/// Kinetic energies of `(x + iy) e^{-r^2}` on the identified space at each
/// grid spacing.
#[pyfunction]
#[pyo3(signature = (grid_levels = None))]
fn energy_divergence(py: Python<'_>, grid_levels: Option<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let levels = grid_levels.unwrap_or_else(continuity::default_grid_levels);
    let demo = py
        .detach(|| continuity::energy_divergence_demo(&expansion::gaussian_dipole, &levels))
        .map_err(err)?;
    to_py(py, &demo)
}

/// Runs a CLI command with an optional JSON configuration; returns the exit
/// code. Reports land in the configured output directory.
#[pyfunction]
#[pyo3(signature = (command, config_json = None))]
fn run_command(py: Python<'_>, command: &str, config_json: Option<&str>) -> PyResult<u8> {
    let cfg = match config_json {
        Some(t) => cli::RunConfig::from_json(t).map_err(err)?,
        None => cli::RunConfig::default(),
    };
    cfg.validate().map_err(err)?;
    let cmd = match command {
        "fermion-exclusion" => cli::Command::FermionExclusion,
        "rotation-closure" => cli::Command::RotationClosure,
        "equivalence" => cli::Command::Equivalence,
        "energy-divergence" => cli::Command::EnergyDivergence,
        "all" => cli::Command::All,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    Ok(py.detach(|| cli::run(cmd, &cfg)))
}

#[pymodule]
fn pairspace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWaveExpansion>()?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(in_domain, m)?)?;
    m.add_function(wrap_pyfunction!(ylm, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_small_d, m)?)?;
    m.add_function(wrap_pyfunction!(fermion_exclusion_report, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_report, m)?)?;
    m.add_function(wrap_pyfunction!(closure_defect, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_symmetry_exclusion, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_element_compare, m)?)?;
    m.add_function(wrap_pyfunction!(energy_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
