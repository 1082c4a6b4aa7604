//! Python bindings: signatures are passed as strings such as `"d,1,i"`,
//! canonical parameters as flat lists in block order, matrices as nested
//! lists. Structured results come back as dicts.

use ck_core::indrep::{self, ContractedElement, Family, RepContext, RepFunction};
use ck_core::orbits::Sign;
use ck_core::{algebra, group, measure, orbits, scalar, CanonicalParams, CkError, Signature};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: CkError) -> PyErr {
    match e {
        CkError::Degeneracy { .. } => PyArithmeticError::new_err(e.to_string()),
        CkError::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type PyRes<T> = PyResult<T>;

fn sig(text: &str) -> PyRes<Signature> {
    Signature::parse(text).map_err(to_py)
}

fn params(n: usize, start: usize, flat: &[f64]) -> PyRes<CanonicalParams> {
    CanonicalParams::from_flat(n, start, flat).map_err(to_py)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyRes<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn parse_sign(text: &str) -> PyRes<Sign> {
    match text {
        "plus" | "+" => Ok(Sign::Plus),
        "minus" | "-" => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err(format!("sign must be 'plus' or 'minus', got {text:?}"))),
    }
}

fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyRes<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Wrap a Python callable `f(flat_params) -> complex` as a subgroup function.
fn callback(f: Py<PyAny>) -> RepFunction {
    RepFunction::new(move |q: &CanonicalParams| {
        Python::attach(|py| {
            f.bind(py)
                .call1((q.flat(),))
                .and_then(|v| v.extract::<Complex64>())
                .map_err(|e| CkError::Domain(format!("python callback failed: {e}")))
        })
    })
}

/// Normalized form of a signature string.
#[pyfunction]
fn parse_signature(text: &str) -> PyRes<String> {
    Ok(sig(text)?.to_string())
}

/// `(VC(u), VS(u), VG(u))`.
#[pyfunction]
fn kernels(u: f64) -> PyRes<(f64, f64, f64)> {
    Ok((
        scalar::kernel_vc(u).map_err(to_py)?,
        scalar::kernel_vs(u).map_err(to_py)?,
        scalar::kernel_vg(u).map_err(to_py)?,
    ))
}

#[pyfunction]
fn rotation_block(signature: &str, k: usize, q: Vec<f64>) -> PyRes<Vec<Vec<f64>>> {
    let s = sig(signature)?;
    let m = group::rotation_block(&s, &ck_core::BlockParams::new(k, q)).map_err(to_py)?;
    Ok(rows(&m.matrix))
}

/// Ordered product of all blocks from flat canonical parameters.
#[pyfunction]
fn group_element(signature: &str, flat: Vec<f64>) -> PyRes<Vec<Vec<f64>>> {
    let s = sig(signature)?;
    let p = params(s.n(), 0, &flat)?;
    Ok(rows(&group::group_element(&s, &p).map_err(to_py)?.matrix))
}

#[pyfunction]
#[pyo3(signature = (signature, m, start = 0))]
fn factorize(signature: &str, m: Vec<Vec<f64>>, start: usize) -> PyRes<Vec<f64>> {
    let s = sig(signature)?;
    Ok(group::factorize(&s, &matrix(&m)?, start).map_err(to_py)?.flat())
}

#[pyfunction]
fn casimir(signature: &str) -> PyRes<Vec<Vec<f64>>> {
    Ok(rows(&algebra::casimir(&sig(signature)?)))
}

#[pyfunction]
fn density(signature: &str, flat: Vec<f64>) -> PyRes<f64> {
    let s = sig(signature)?;
    Ok(measure::density(&s, &params(s.n(), 0, &flat)?))
}

/// Orbit invariant of a character `h` for the subgroup signature `j'`.
#[pyfunction]
fn orbit_invariant(subgroup: &str, h: Vec<f64>) -> PyRes<f64> {
    orbits::orbit_invariant(&sig(subgroup)?, &h).map_err(to_py)
}

#[pyfunction]
fn classify_orbit<'py>(py: Python<'py>, subgroup: &str, h: Vec<f64>) -> PyRes<Bound<'py, PyAny>> {
    let c = orbits::classify_orbit(&sig(subgroup)?, &h).map_err(to_py)?;
    to_dict(py, &c)
}

/// Coordinates of `Ad(k⁻¹(Q⁰))x`; `flat` holds subgroup blocks `1..n`.
#[pyfunction]
fn transported(subgroup: &str, flat: Vec<f64>, x: Vec<f64>) -> PyRes<Vec<f64>> {
    let s = sig(subgroup)?;
    indrep::transported(&s, &params(s.n() + 1, 1, &flat)?, &x).map_err(to_py)
}

#[pyfunction]
fn dcoeffs(subgroup: &str, flat: Vec<f64>, x: Vec<f64>) -> PyRes<Vec<f64>> {
    let s = sig(subgroup)?;
    indrep::dcoeffs(&s, &params(s.n() + 1, 1, &flat)?, &x).map_err(to_py)
}

/// Heisenberg closed form `e^{±iR(x₂ - x₁Q⁰₁₂)} f(Q⁰₁₂ - Q₁₂)`.
#[pyfunction]
fn heisenberg_apply(r: f64, sign: &str, x: (f64, f64), q12: f64, f: Py<PyAny>, q0_12: f64) -> PyRes<Complex64> {
    indrep::heisenberg_apply(r, parse_sign(sign)?, [x.0, x.1], q12, &callback(f), q0_12).map_err(to_py)
}

/// `(U(t(x)k(Q)) f)(Q⁰)` for the positive-radius family on `signature`
/// (which must start with `d`).
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn omega_apply(signature: &str, r: f64, sign: &str, x: Vec<f64>, k: Vec<f64>, f: Py<PyAny>, q0: Vec<f64>) -> PyRes<Complex64> {
    let s = sig(signature)?;
    let ctx = RepContext::new(&s, Family::Positive { r }, parse_sign(sign)?).map_err(to_py)?;
    let n = s.n();
    let g = ContractedElement::new(x, params(n, 1, &k)?);
    indrep::omega_apply(&ctx, &g, &callback(f), &params(n, 1, &q0)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (signature, epsilons = vec![1e-1, 1e-2, 1e-3, 1e-4], seed = 0))]
fn contraction_check<'py>(py: Python<'py>, signature: &str, epsilons: Vec<f64>, seed: u64) -> PyRes<Bound<'py, PyAny>> {
    let r = indrep::contraction_limit_check(&sig(signature)?, &epsilons, seed).map_err(to_py)?;
    to_dict(py, &r)
}

/// Run the `ck` command line with `args` (without the program name) and
/// return its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let mut full = vec!["ck".to_string()];
    full.extend(args);
    py.detach(|| ck_core::cli::run(&full))
}

#[pymodule]
fn cayley_klein(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(parse_signature, m)?)?;
    m.add_function(wrap_pyfunction!(kernels, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_block, m)?)?;
    m.add_function(wrap_pyfunction!(group_element, m)?)?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(casimir, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(classify_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(transported, m)?)?;
    m.add_function(wrap_pyfunction!(dcoeffs, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_apply, m)?)?;
    m.add_function(wrap_pyfunction!(omega_apply, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
