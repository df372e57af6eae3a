//! Python bindings: threshold tables, functionals, scenario runs and the
//! built-in property suite.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde_json::Value;
use starnls::{EdgeGrid, FarBoundary, Focusing, GraphFunction, ModelParams};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(format!("{e:#}"))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, x: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(err)?)
}

fn model(n_edges: usize, gamma: f64, p: f64, mu: i32, omega: f64) -> PyResult<ModelParams> {
    ModelParams::new(n_edges, gamma, p, mu, omega).map_err(err)
}

/// Threshold table of the focusing problem as a dict.
#[pyfunction]
#[pyo3(signature = (p, gamma = 0.0, omega = 1.0, n_edges = 3))]
fn threshold_table<'py>(py: Python<'py>, p: f64, gamma: f64, omega: f64, n_edges: usize) -> PyResult<Bound<'py, PyAny>> {
    let mp = model(n_edges, gamma, p, -1, omega)?;
    serialize(py, &starnls::threshold_table(&mp).map_err(err)?)
}

/// Sharp Gagliardo–Nirenberg constant on the line.
#[pyfunction]
fn gn_constant_line(p: f64) -> PyResult<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(PyValueError::new_err("need p > 1"));
    }
    Ok(starnls::gn_constant_line(p))
}

/// Functionals of a vertex-continuous state given as one list of complex
/// samples per edge on `[0, length]` (Dirichlet far end).
#[pyfunction]
#[pyo3(signature = (edges, length, p, gamma = 0.0, mu = -1, omega = 1.0))]
fn evaluate_functionals<'py>(
    py: Python<'py>,
    edges: Vec<Vec<C64>>,
    length: f64,
    p: f64,
    gamma: f64,
    mu: i32,
    omega: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let n_points = edges.first().map(Vec::len).unwrap_or(0);
    if edges.iter().any(|e| e.len() != n_points) {
        return Err(PyValueError::new_err("all edges need the same number of samples"));
    }
    let grid = EdgeGrid::new(length, n_points, FarBoundary::Dirichlet).map_err(err)?;
    let mp = model(edges.len(), gamma, p, mu, omega)?;
    let f = GraphFunction { grid, values: edges };
    let report = starnls::evaluate_functionals(&f, &mp).map_err(err)?;
    let d = serialize(py, &report)?;
    if mp.sign == Focusing::Focusing && p > 5.0 {
        let v = starnls::classify_potential_well(&f, &mp).map_err(err)?;
        d.set_item("dichotomy", serialize(py, &v)?)?;
    }
    Ok(d)
}

/// Runs a scenario file; returns the verdict with the written file paths
/// under `"files"`.
#[pyfunction]
#[pyo3(signature = (path, out = None))]
fn run_scenario<'py>(py: Python<'py>, path: PathBuf, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let mut s = starnls_cli::Scenario::load(&path).map_err(err)?;
    if let Some(dir) = out {
        s.outputs.directory = dir;
    }
    let r = py.detach(|| starnls_cli::run_scenario(&s)).map_err(err)?;
    let d = serialize(py, &r.verdict)?;
    let files: Vec<String> = r.files.iter().map(|f| f.display().to_string()).collect();
    d.set_item("files", files)?;
    Ok(d)
}

/// The built-in property suite: a list of `{name, pass, value, tolerance}`.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn check(py: Python<'_>, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let results = py.detach(|| starnls_cli::check::run_checks(seed)).map_err(err)?;
    serialize(py, &results)
}

#[pymodule]
#[pyo3(name = "starnls")]
fn starnls_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(threshold_table, m)?)?;
    m.add_function(wrap_pyfunction!(gn_constant_line, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_functionals, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
