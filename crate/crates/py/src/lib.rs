//! Python bindings: the domain types (forms, lattices, regions) as classes,
//! the counting and statistics operations as functions returning plain Python
//! structures.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use randlat_core as core;
use randlat_core::Matrix;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(err)
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.n())
        .map(|i| (0..m.n()).map(|j| m.get(i, j)).collect())
        .collect()
}

/// serde_json -> Python conversion, for ergonomic dict returns.
fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.unbind().into()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.unbind().into()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.unbind().into(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.unbind().into()
        }
    })
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value)
        .map_err(|e| PyValueError::new_err(format!("serialization failed: {e}")))?;
    json_to_py(py, &v)
}

fn parse_sampler(sampler: &str, n: usize, q: u64) -> PyResult<core::LatticeSampler> {
    match sampler {
        "gm" => Ok(core::LatticeSampler::GoldsteinMayer { n, q }),
        "gaussian" => Ok(core::LatticeSampler::Gaussian { n }),
        other => Err(PyValueError::new_err(format!(
            "sampler must be 'gm' or 'gaussian', got '{other}'"
        ))),
    }
}

/// Real quadratic form of signature (p, q), evaluated as x^T G x.
#[pyclass(frozen)]
struct QuadraticForm {
    inner: core::QuadraticForm,
}

#[pymethods]
impl QuadraticForm {
    #[new]
    fn new(gram: Vec<Vec<f64>>) -> PyResult<Self> {
        let m = matrix_from_rows(gram)?;
        Ok(QuadraticForm {
            inner: core::QuadraticForm::new(m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn standard(p: usize, q: usize) -> PyResult<Self> {
        Ok(QuadraticForm {
            inner: core::QuadraticForm::standard(p, q).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(p: usize, q: usize, seed: u64) -> PyResult<Self> {
        Ok(QuadraticForm {
            inner: core::QuadraticForm::random(p, q, seed).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(QuadraticForm {
            inner: core::QuadraticForm::from_json(text).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn signature(&self) -> (usize, usize) {
        self.inner.signature()
    }

    #[getter]
    fn gram(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.gram())
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&x).map_err(err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.gradient(&x).map_err(err)
    }

    fn deform(&self, g: Vec<Vec<f64>>) -> PyResult<QuadraticForm> {
        let m = matrix_from_rows(g)?;
        Ok(QuadraticForm {
            inner: self.inner.deform(&m).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        let (p, q) = self.inner.signature();
        format!("QuadraticForm(dim={}, signature=({p},{q}))", self.inner.dim())
    }
}

/// Unimodular lattice g Z^n (basis vectors are columns, det = 1).
#[pyclass(frozen)]
struct Lattice {
    inner: core::Lattice,
}

#[pymethods]
impl Lattice {
    #[staticmethod]
    fn standard(n: usize) -> Lattice {
        Lattice {
            inner: core::Lattice::standard(n),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (rows, normalize = false))]
    fn from_basis(rows: Vec<Vec<f64>>, normalize: bool) -> PyResult<Lattice> {
        let m = matrix_from_rows(rows)?;
        Ok(Lattice {
            inner: core::Lattice::from_basis(m, normalize).map_err(err)?,
        })
    }

    #[staticmethod]
    fn gaussian(n: usize, seed: u64) -> PyResult<Lattice> {
        Ok(Lattice {
            inner: core::Lattice::gaussian_unimodular(n, seed).map_err(err)?,
        })
    }

    #[staticmethod]
    fn goldstein_mayer(n: usize, q: u64, seed: u64) -> PyResult<Lattice> {
        Ok(Lattice {
            inner: core::Lattice::goldstein_mayer(n, q, seed).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Lattice> {
        Ok(Lattice {
            inner: core::Lattice::from_json(text).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.basis())
    }

    fn det(&self) -> f64 {
        self.inner.det()
    }

    #[pyo3(signature = (delta = core::DEFAULT_LLL_DELTA))]
    fn lll_reduce(&self, delta: f64) -> PyResult<Lattice> {
        Ok(Lattice {
            inner: self.inner.lll_reduced(delta).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Lattice(dim={})", self.inner.dim())
    }
}

/// Measurable region of R^n: membership predicate, bounding radius, volume.
#[pyclass(frozen)]
struct Region {
    inner: core::Region,
}

#[pymethods]
impl Region {
    #[staticmethod]
    fn ball(dim: usize, radius: f64) -> Region {
        Region {
            inner: core::Region::ball(dim, radius),
        }
    }

    #[staticmethod]
    fn ball_with_volume(dim: usize, volume: f64) -> Region {
        Region {
            inner: core::Region::ball_with_volume(dim, volume),
        }
    }

    #[staticmethod]
    fn quad_shell(form: &QuadraticForm, a: f64, b: f64, t: f64) -> PyResult<Region> {
        Ok(Region {
            inner: core::Region::quad_shell(&form.inner, a, b, t).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(name = "box", signature = (sides, center = None))]
    fn box_(sides: Vec<f64>, center: Option<Vec<f64>>) -> PyResult<Region> {
        let center = center.unwrap_or_else(|| vec![0.0; sides.len()]);
        Ok(Region {
            inner: core::Region::box_at(&center, &sides).map_err(err)?,
        })
    }

    fn dilate(&self, t: f64) -> Region {
        Region {
            inner: self.inner.dilate(t),
        }
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        x.len() == self.inner.dim() && self.inner.contains(&x)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn bounding_radius(&self) -> f64 {
        self.inner.bounding_radius()
    }

    #[getter]
    fn volume(&self) -> Option<f64> {
        self.inner.volume()
    }

    fn __repr__(&self) -> String {
        format!("Region({})", self.inner.label())
    }
}

#[pyfunction]
fn c_n(n: usize) -> PyResult<f64> {
    core::c_n(n).map_err(err)
}

#[pyfunction]
fn ball_volume(n: usize, r: f64) -> f64 {
    core::ball_volume(n, r)
}

#[pyfunction]
fn symmetrization_radius(a: f64, n: usize) -> f64 {
    core::symmetrization_radius(a, n)
}

#[pyfunction]
fn count_region(lattice: &Lattice, region: &Region) -> PyResult<u64> {
    core::count_region(&lattice.inner, &region.inner).map_err(err)
}

/// Alias of count_region for indicator functions.
#[pyfunction]
fn siegel_transform(lattice: &Lattice, region: &Region) -> PyResult<u64> {
    core::siegel_transform(&lattice.inner, &region.inner).map_err(err)
}

/// Nonzero lattice points of norm <= t as (coeffs, vector, norm) tuples.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn points_in_ball(lattice: &Lattice, t: f64) -> PyResult<Vec<(Vec<i64>, Vec<f64>, f64)>> {
    let pts = core::points_in_ball(&lattice.inner, t).map_err(err)?;
    Ok(pts
        .into_iter()
        .map(|p| (p.coeffs, p.vector, p.norm))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (form, eps, t_max, mode = "two_sided"))]
fn min_height_solution(
    py: Python<'_>,
    form: &QuadraticForm,
    eps: f64,
    t_max: f64,
    mode: &str,
) -> PyResult<Py<PyAny>> {
    let mode = core::SearchMode::parse(mode).map_err(err)?;
    let sol = core::min_height_solution(&form.inner, eps, mode, t_max).map_err(err)?;
    match sol {
        None => Ok(py.None()),
        Some(s) => {
            let dict = PyDict::new(py);
            dict.set_item("x", s.x)?;
            dict.set_item("height", s.height)?;
            dict.set_item("value", s.value)?;
            Ok(dict.unbind().into())
        }
    }
}

#[pyfunction]
fn mc_volume(py: Python<'_>, region: &Region, samples: u64, seed: u64) -> PyResult<Py<PyAny>> {
    let est = core::mc_volume(&region.inner, samples, seed);
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(signature = (form, a, b, t_grid, samples = 1_000_000, seed = 0))]
fn c_q_estimate(
    py: Python<'_>,
    form: &QuadraticForm,
    a: f64,
    b: f64,
    t_grid: Vec<f64>,
    samples: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let est = core::c_q_estimate(&form.inner, a, b, &t_grid, samples, seed).map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(signature = (form, eta = core::DEFAULT_THIN_SHELL_ETA, samples = 1_000_000, seed = 0))]
fn c_p_surface(
    py: Python<'_>,
    form: &QuadraticForm,
    eta: f64,
    samples: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let est = core::c_p_surface(&form.inner, eta, samples, seed).map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(signature = (region, trials, master_seed, sampler = "gm", q = core::DEFAULT_GM_MODULUS))]
fn mean_variance(
    py: Python<'_>,
    region: &Region,
    trials: u64,
    master_seed: u64,
    sampler: &str,
    q: u64,
) -> PyResult<Py<PyAny>> {
    let sampler = parse_sampler(sampler, region.inner.dim(), q)?;
    let stats =
        core::mean_variance(&sampler, &region.inner, trials, master_seed).map_err(err)?;
    to_py(py, &stats)
}

#[pyfunction]
#[pyo3(signature = (region, trials, master_seed, sampler = "gm", q = core::DEFAULT_GM_MODULUS))]
fn hole_probability(
    region: &Region,
    trials: u64,
    master_seed: u64,
    sampler: &str,
    q: u64,
) -> PyResult<f64> {
    let sampler = parse_sampler(sampler, region.inner.dim(), q)?;
    core::hole_probability(&sampler, &region.inner, trials, master_seed).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (region, m, trials, master_seed, sampler = "gm", q = core::DEFAULT_GM_MODULUS))]
fn concentration_tail(
    region: &Region,
    m: f64,
    trials: u64,
    master_seed: u64,
    sampler: &str,
    q: u64,
) -> PyResult<f64> {
    let sampler = parse_sampler(sampler, region.inner.dim(), q)?;
    core::concentration_tail(&sampler, &region.inner, m, trials, master_seed).map_err(err)
}

#[pyfunction]
fn fit_loglog(py: Python<'_>, pairs: Vec<(f64, f64)>) -> PyResult<Py<PyAny>> {
    let fit = core::fit_loglog(&pairs).map_err(err)?;
    to_py(py, &fit)
}

#[pyfunction]
#[pyo3(signature = (form, j_max, t_max, seed, mode = "two_sided"))]
fn small_values_experiment(
    py: Python<'_>,
    form: &QuadraticForm,
    j_max: u32,
    t_max: f64,
    seed: u64,
    mode: &str,
) -> PyResult<Py<PyAny>> {
    let mode = core::SearchMode::parse(mode).map_err(err)?;
    let out = core::small_values_experiment(&form.inner, j_max, mode, t_max, seed).map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
fn error_term_experiment(
    py: Python<'_>,
    form: &QuadraticForm,
    a: f64,
    b: f64,
    t_grid: Vec<f64>,
    c_q: f64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let out =
        core::error_term_experiment(&form.inner, a, b, &t_grid, c_q, seed).map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (region, t_grid, delta, lattices, master_seed, sampler = "gaussian", q = core::DEFAULT_GM_MODULUS))]
#[allow(clippy::too_many_arguments)]
fn dilates_experiment(
    py: Python<'_>,
    region: &Region,
    t_grid: Vec<f64>,
    delta: f64,
    lattices: u64,
    master_seed: u64,
    sampler: &str,
    q: u64,
) -> PyResult<Py<PyAny>> {
    let sampler = parse_sampler(sampler, region.inner.dim(), q)?;
    let out = core::dilates_experiment(
        &sampler,
        &region.inner,
        &t_grid,
        delta,
        lattices,
        master_seed,
    )
    .map_err(err)?;
    to_py(py, &out)
}

/// Sequence counting with B_k the centered ball of volume k and weight
/// f(k) = k^f_power.
#[pyfunction]
#[pyo3(signature = (n, k_max, lattices, master_seed, f_power = 1.0, sampler = "gm", q = core::DEFAULT_GM_MODULUS))]
#[allow(clippy::too_many_arguments)]
fn sequences_experiment(
    py: Python<'_>,
    n: usize,
    k_max: u32,
    lattices: u64,
    master_seed: u64,
    f_power: f64,
    sampler: &str,
    q: u64,
) -> PyResult<Py<PyAny>> {
    let sampler = parse_sampler(sampler, n, q)?;
    let out = core::sequences_experiment(
        &sampler,
        &move |k| core::Region::ball_with_volume(n, k as f64),
        &move |k| (k as f64).powf(f_power),
        k_max,
        lattices,
        master_seed,
    )
    .map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("records", to_py(py, &out.records)?)?;
    dict.set_item("last_violation", out.last_violation.clone())?;
    dict.set_item("fraction_clean_from_k10", out.fraction_clean_from(10))?;
    Ok(dict.unbind().into())
}

#[pymodule]
fn randlat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<QuadraticForm>()?;
    m.add_class::<Lattice>()?;
    m.add_class::<Region>()?;
    m.add_function(wrap_pyfunction!(c_n, m)?)?;
    m.add_function(wrap_pyfunction!(ball_volume, m)?)?;
    m.add_function(wrap_pyfunction!(symmetrization_radius, m)?)?;
    m.add_function(wrap_pyfunction!(count_region, m)?)?;
    m.add_function(wrap_pyfunction!(siegel_transform, m)?)?;
    m.add_function(wrap_pyfunction!(points_in_ball, m)?)?;
    m.add_function(wrap_pyfunction!(min_height_solution, m)?)?;
    m.add_function(wrap_pyfunction!(mc_volume, m)?)?;
    m.add_function(wrap_pyfunction!(c_q_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(c_p_surface, m)?)?;
    m.add_function(wrap_pyfunction!(mean_variance, m)?)?;
    m.add_function(wrap_pyfunction!(hole_probability, m)?)?;
    m.add_function(wrap_pyfunction!(concentration_tail, m)?)?;
    m.add_function(wrap_pyfunction!(fit_loglog, m)?)?;
    m.add_function(wrap_pyfunction!(small_values_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(error_term_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(dilates_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sequences_experiment, m)?)?;
    Ok(())
}
