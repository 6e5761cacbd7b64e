//! Python bindings. Calculi and matrices travel as their text formats;
//! reports come back as plain dicts and lists.

use manyval_core::analysis::{self, Budget, CompareMode, EnumOptions};
use manyval_core::calculus::{builtin_calculi, builtin_calculus, ipc, Calculus};
use manyval_core::kripke::matrix_of_model;
use manyval_core::matrix::{self, Matrix};
use manyval_core::syntax::{parse_formula, Formula};
use manyval_core::text;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(err)?;
    PyModule::import(py, "json")?.call_method1("loads", (s,))
}

/// Calculus text, or `builtin:NAME`.
fn calculus(arg: &str) -> PyResult<Calculus> {
    match arg.strip_prefix("builtin:") {
        Some(name) => builtin_calculus(name).ok_or_else(|| err(format!("no builtin calculus `{name}`"))),
        None => text::parse_calculus(arg).map_err(err),
    }
}

fn matrix(arg: &str) -> PyResult<Matrix> {
    text::parse_matrix(arg).map_err(err)
}

/// A formula over the calculus, or an axiom name of it or of a builtin
/// calculus over the same signature.
fn formula(c: &Calculus, arg: &str) -> PyResult<Formula> {
    let parsed = parse_formula(arg, c.sig());
    if let Ok(f) = parsed {
        return Ok(f);
    }
    std::iter::once(c.clone())
        .chain(builtin_calculi().into_iter().chain([ipc()]).filter(|b| b.sig() == c.sig()))
        .find_map(|b| b.axiom(arg).map(|a| a.formula.clone()))
        .ok_or_else(|| err(parsed.unwrap_err()))
}

#[pyfunction]
fn builtin(name: &str) -> PyResult<String> {
    Ok(text::write_calculus(&calculus(&format!("builtin:{name}"))?))
}

#[pyfunction]
fn godel(m: usize) -> PyResult<String> {
    Ok(text::write_matrix(&matrix::godel(m).map_err(err)?))
}

#[pyfunction]
fn check<'py>(py: Python<'py>, calculus_text: &str, matrix_text: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = analysis::check_strong_soundness(&calculus(calculus_text)?, &matrix(matrix_text)?).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (calculus_text, matrix_text, closure_cap = 1_000_000))]
fn t_sound<'py>(
    py: Python<'py>,
    calculus_text: &str,
    matrix_text: &str,
    closure_cap: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let budget = Budget::default().with_closure_cap(closure_cap);
    let (c, m) = (calculus(calculus_text)?, matrix(matrix_text)?);
    let r = py.detach(|| analysis::check_t_soundness(&c, &m, &budget)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (calculus_text, formula_text, max_values = 3))]
fn falsify<'py>(
    py: Python<'py>,
    calculus_text: &str,
    formula_text: &str,
    max_values: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let c = calculus(calculus_text)?;
    let f = formula(&c, formula_text)?;
    let r = py
        .detach(|| analysis::falsify(&c, &f, max_values, &Budget::default()))
        .map_err(err)?;
    to_py(py, &r)
}

/// Whether some tautology of `right` is not a tautology of `left`.
#[pyfunction]
#[pyo3(signature = (left, right, depth = None, vars = 2))]
fn compare<'py>(
    py: Python<'py>,
    left: &str,
    right: &str,
    depth: Option<usize>,
    vars: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let (m1, m2) = (matrix(left)?, matrix(right)?);
    let mode = match depth {
        Some(depth) => CompareMode::Bounded { depth, vars },
        None => CompareMode::Exact,
    };
    let r = py
        .detach(|| analysis::compare(&m1, &m2, mode, &Budget::default()))
        .map_err(err)?;
    to_py(py, &r)
}

/// Covers with `values` values, one per isomorphism class, as matrix text.
#[pyfunction]
#[pyo3(signature = (calculus_text, values, include_trivial = true))]
fn covers(py: Python<'_>, calculus_text: &str, values: usize, include_trivial: bool) -> PyResult<Vec<String>> {
    let c = calculus(calculus_text)?;
    let options = EnumOptions {
        include_trivial,
        include_empty: true,
    };
    let e = py.detach(|| analysis::enumerate_covers(&c, values, options, &Budget::default()));
    if e.truncated {
        return Err(err(format!("enumeration truncated after {} nodes", e.nodes)));
    }
    Ok(e.covers.iter().map(|k| text::write_matrix(&k.matrix)).collect())
}

#[pyfunction]
#[pyo3(signature = (model_text, cap = 4096))]
fn kripke_to_matrix(model_text: &str, cap: usize) -> PyResult<String> {
    let k = text::parse_kripke(model_text).map_err(err)?;
    Ok(text::write_matrix(&matrix_of_model(&k, cap).map_err(err)?))
}

#[pymodule]
fn manyval(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(builtin, m)?)?;
    m.add_function(wrap_pyfunction!(godel, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(t_sound, m)?)?;
    m.add_function(wrap_pyfunction!(falsify, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(covers, m)?)?;
    m.add_function(wrap_pyfunction!(kripke_to_matrix, m)?)?;
    Ok(())
}
