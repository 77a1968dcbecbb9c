//! Python bindings. Rationals cross the boundary as `fractions.Fraction`
//! (inputs may also be ints or `"p/q"` strings).

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mms_core::calibration::{self, CalibrationFn};
use mms_core::gen;
use mms_core::oracle::{self, DEFAULT_ORACLE_LIMIT};
use mms_core::pipeline::{self, RunConfig};
use mms_core::rational::{self, Rational};
use mms_core::verify::verify_allocation_with_limit;
use mms_core::{Allocation, Error};

create_exception!(mms1013, ApproximationFailure, PyRuntimeError);
create_exception!(mms1013, OracleScaleExceeded, PyValueError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ApproximationFailure { .. } => ApproximationFailure::new_err(e.to_string()),
        Error::OracleScaleExceeded { .. } => OracleScaleExceeded::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rational_in(x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    rational::parse(&x.str()?.to_cow()?).map_err(to_py)
}

fn rational_out<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((rational::format(r),))
}

fn row_in(row: &Bound<'_, PyAny>) -> PyResult<Vec<Rational>> {
    row.try_iter()?.map(|x| rational_in(&x?)).collect()
}

fn json_out<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.getattr("loads")?.call1((text,))
}

/// Valuation matrix with exact rational entries.
#[pyclass(name = "Instance", module = "mms1013", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: mms_core::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    fn new(values: &Bound<'_, PyAny>) -> PyResult<Self> {
        let rows: Vec<Vec<Rational>> = values
            .try_iter()?
            .map(|r| row_in(&r?))
            .collect::<PyResult<_>>()?;
        let inner = mms_core::Instance::from_rows(rows).map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = mms_core::Instance::from_json(text).map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn agents(&self) -> usize {
        self.inner.agents()
    }

    #[getter]
    fn goods(&self) -> usize {
        self.inner.goods()
    }

    fn values<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.inner
            .values()
            .iter()
            .map(|row| row.iter().map(|x| rational_out(py, x)).collect())
            .collect()
    }

    fn bundle_value<'py>(&self, py: Python<'py>, agent: usize, bundle: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        if agent >= self.inner.agents() || bundle.iter().any(|&g| g >= self.inner.goods()) {
            return Err(PyValueError::new_err("agent or good out of range"));
        }
        rational_out(py, &self.inner.bundle_value(agent, &bundle))
    }

    fn __repr__(&self) -> String {
        format!("Instance(agents={}, goods={})", self.inner.agents(), self.inner.goods())
    }
}

fn parse_alpha(alpha: &Bound<'_, PyAny>) -> PyResult<Rational> {
    rational_in(alpha)
}

/// Run the full pipeline. Returns `(bundles, trace)` with `trace` a dict.
#[pyfunction]
#[pyo3(signature = (instance, alpha = None, oracle_limit = DEFAULT_ORACLE_LIMIT))]
fn allocate<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    alpha: Option<&Bound<'py, PyAny>>,
    oracle_limit: usize,
) -> PyResult<(Vec<Vec<usize>>, Bound<'py, PyAny>)> {
    let alpha = alpha.map(parse_alpha).transpose()?.unwrap_or_else(rational::default_alpha);
    let cfg = RunConfig { alpha, oracle_limit };
    let inst = instance.inner.clone();
    let out = py.detach(move || pipeline::run(&inst, &cfg)).map_err(to_py)?;
    let trace = json_out(py, &out.trace.to_json().map_err(to_py)?)?;
    Ok((out.allocation.bundles, trace))
}

/// Exact shares for every agent against a given allocation, as a dict.
#[pyfunction]
#[pyo3(signature = (instance, bundles, alpha = None, oracle_limit = DEFAULT_ORACLE_LIMIT))]
fn verify<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    bundles: Vec<Vec<usize>>,
    alpha: Option<&Bound<'py, PyAny>>,
    oracle_limit: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let alpha = alpha.map(parse_alpha).transpose()?.unwrap_or_else(rational::default_alpha);
    let alloc = Allocation { bundles };
    let report = verify_allocation_with_limit(&instance.inner, &alloc, &alpha, oracle_limit).map_err(to_py)?;
    json_out(py, &report.to_json().map_err(to_py)?)
}

/// Maximin share of `goods` (default: all) over `d` bundles, with a witness.
#[pyfunction]
#[pyo3(signature = (values, d, goods = None, oracle_limit = DEFAULT_ORACLE_LIMIT))]
fn maximin_share<'py>(
    py: Python<'py>,
    values: &Bound<'py, PyAny>,
    d: usize,
    goods: Option<Vec<usize>>,
    oracle_limit: usize,
) -> PyResult<(Bound<'py, PyAny>, Vec<Vec<usize>>)> {
    let v = row_in(values)?;
    let goods = goods.unwrap_or_else(|| (0..v.len()).collect());
    let r = oracle::mms_value_with_limit(&v, d, &goods, oracle_limit).map_err(to_py)?;
    Ok((rational_out(py, &r.value)?, r.partition))
}

/// Instance from a named family: uniform, clustered, paper-example-1/2.
#[pyfunction]
#[pyo3(signature = (family, n = 3, m = 12, seed = 0))]
fn generate(family: &str, n: usize, m: usize, seed: u64) -> PyResult<PyInstance> {
    let family: gen::Family = family.parse().map_err(to_py)?;
    let inner = gen::generate(family, n, m, seed).map_err(to_py)?;
    Ok(PyInstance { inner })
}

/// Evaluate a calibration function (`"F"`, `"H"`, `"W"`, `"Z"`) at `x`.
#[pyfunction]
#[pyo3(signature = (family, x, lam = None, alpha = None))]
fn calibrate<'py>(
    py: Python<'py>,
    family: &str,
    x: &Bound<'py, PyAny>,
    lam: Option<&Bound<'py, PyAny>>,
    alpha: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let family: calibration::Family = family.parse().map_err(to_py)?;
    let alpha = alpha.map(parse_alpha).transpose()?.unwrap_or_else(rational::default_alpha);
    let lam = match lam {
        Some(l) => rational_in(l)?,
        None => Rational::from_integer(0.into()),
    };
    let f = CalibrationFn::new(family, lam, alpha).map_err(to_py)?;
    rational_out(py, &f.eval(&rational_in(x)?).map_err(to_py)?)
}

/// Random sweep of one calibrated share bound; returns the report dict.
#[pyfunction]
#[pyo3(signature = (lemma, trials = 100, seed = 0, alpha = None))]
fn lemma_check<'py>(
    py: Python<'py>,
    lemma: &str,
    trials: usize,
    seed: u64,
    alpha: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    use rand::SeedableRng;
    let family: calibration::Family = lemma.parse().map_err(to_py)?;
    let alpha = alpha.map(parse_alpha).transpose()?.unwrap_or_else(rational::default_alpha);
    let report = py
        .detach(move || {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            calibration::lemma_sweep(family, &alpha, trials, DEFAULT_ORACLE_LIMIT, &mut rng)
        })
        .map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| to_py(e.into()))?;
    json_out(py, &text)
}

#[pymodule]
fn mms1013(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(allocate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(maximin_share, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_check, m)?)?;
    m.add("ApproximationFailure", m.py().get_type::<ApproximationFailure>())?;
    m.add("OracleScaleExceeded", m.py().get_type::<OracleScaleExceeded>())?;
    m.add("ALPHA", rational_out(m.py(), &rational::default_alpha())?)?;
    Ok(())
}
