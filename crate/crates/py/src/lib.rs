//! Python bindings. Matrices are nested 2x2 sequences of Python complex
//! numbers; a matrix set is a list of them.

use num_complex::Complex64;
use ::planar_switching::{self as ps, Mat2, MatrixSet, SearchConfig, Tolerance, Vec2};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(planar_switching, AnalysisError, PyException);
create_exception!(planar_switching, WorkBudgetExceeded, AnalysisError);
create_exception!(planar_switching, NotMarginallyUnstable, AnalysisError);

type PyMat = [[Complex64; 2]; 2];

fn to_py_err(e: ps::Error) -> PyErr {
    match e {
        ps::Error::WorkBudgetExceeded { .. } => WorkBudgetExceeded::new_err(e.to_string()),
        ps::Error::NotMarginallyUnstable(_) => NotMarginallyUnstable::new_err(e.to_string()),
        ps::Error::EmptySet
        | ps::Error::NonFinite { .. }
        | ps::Error::IndexOutOfRange { .. }
        | ps::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => AnalysisError::new_err(e.to_string()),
    }
}

fn mat(m: &PyMat) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn matrix_set(matrices: Vec<PyMat>, tol: f64) -> PyResult<MatrixSet> {
    let tol = Tolerance::new(tol).map_err(to_py_err)?;
    MatrixSet::new(matrices.iter().map(mat).collect(), tol).map_err(to_py_err)
}

/// Largest singular value of a 2x2 complex matrix.
#[pyfunction]
fn operator_norm(m: PyMat) -> f64 {
    ps::operator_norm(&mat(&m))
}

#[pyfunction]
fn spectral_radius(m: PyMat) -> f64 {
    ps::spectral_radius(&mat(&m))
}

/// `(lower, upper)` JSR bracket from all words up to `depth`.
#[pyfunction]
#[pyo3(signature = (matrices, depth, tol = 1e-9))]
fn jsr_bounds(matrices: Vec<PyMat>, depth: usize, tol: f64) -> PyResult<(f64, f64)> {
    let set = matrix_set(matrices, tol)?;
    let b = ps::jsr_bounds(&set, &SearchConfig::exact(depth)).map_err(to_py_err)?;
    Ok((b.lower, b.upper))
}

/// `[b_1, ..., b_depth]`, the largest product norm at each length.
#[pyfunction]
#[pyo3(signature = (matrices, depth, tol = 1e-9))]
fn rate_sequence(matrices: Vec<PyMat>, depth: usize, tol: f64) -> PyResult<Vec<f64>> {
    let set = matrix_set(matrices, tol)?;
    let r = ps::rate_sequence(&set, &SearchConfig::exact(depth)).map_err(to_py_err)?;
    Ok(r.values)
}

/// Norms `‖v_n‖` for `n = 0..=steps` along a periodic word of member indices.
#[pyfunction]
#[pyo3(signature = (matrices, word, v0, steps, tol = 1e-9))]
fn simulate_periodic(
    matrices: Vec<PyMat>,
    word: Vec<usize>,
    v0: [Complex64; 2],
    steps: usize,
    tol: f64,
) -> PyResult<Vec<f64>> {
    let set = matrix_set(matrices, tol)?;
    let seq = ps::SwitchingSequence::periodic(word).map_err(to_py_err)?;
    let t = ps::simulate(&set, &seq, &Vec2::new(v0[0], v0[1]), steps).map_err(to_py_err)?;
    Ok(t.norms)
}

#[pyclass(frozen, module = "planar_switching")]
struct Verdict {
    inner: ps::Verdict,
}

#[pymethods]
impl Verdict {
    /// Regime name, e.g. `"MarginallyUnstable"`.
    #[getter]
    fn regime(&self) -> String {
        format!("{:?}", self.inner.regime)
    }

    /// Bracket the decision used: exact when the members share an eigenvector.
    #[getter]
    fn jsr(&self) -> (f64, f64) {
        self.inner.effective_bracket()
    }

    #[getter]
    fn band(&self) -> f64 {
        self.inner.band
    }

    #[getter]
    fn rates(&self) -> Vec<f64> {
        self.inner.rates.values.clone()
    }

    /// Uniform bound on product norms when one was certified.
    #[getter]
    fn product_bound(&self) -> Option<f64> {
        self.inner.certificate.as_ref().map(|c| c.product_bound())
    }

    #[getter]
    fn linear_slope(&self) -> Option<f64> {
        self.inner.linear_ceiling.map(|c| c.slope)
    }

    #[getter]
    fn case_tag(&self) -> Option<String> {
        self.inner.witness.as_ref().map(|w| format!("{:?}", w.case_tag))
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes.clone()
    }

    /// Full verdict as a JSON string.
    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("verdict serializes")
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.inner.effective_bracket();
        format!("Verdict(regime={:?}, jsr=[{lo}, {hi}])", self.inner.regime)
    }
}

fn options(depth: usize, band: Option<f64>, assert_unit_jsr: bool, tol: f64) -> ps::ClassifyOptions {
    let mut opts = ps::ClassifyOptions::new(depth);
    opts.band = band;
    opts.assert_unit_jsr = assert_unit_jsr;
    opts.root_policy.tol = tol;
    opts
}

#[pyfunction]
#[pyo3(signature = (matrices, depth = 8, band = None, assert_unit_jsr = false, tol = 1e-9))]
fn classify(
    matrices: Vec<PyMat>,
    depth: usize,
    band: Option<f64>,
    assert_unit_jsr: bool,
    tol: f64,
) -> PyResult<Verdict> {
    let set = matrix_set(matrices, tol)?;
    let inner = ps::classify_with(&set, &options(depth, band, assert_unit_jsr, tol)).map_err(to_py_err)?;
    Ok(Verdict { inner })
}

/// Classify, then follow the escape witness for `steps` steps.
/// Returns `(case_tag, norms)` with `norms[n] = ‖v_n‖`.
#[pyfunction]
#[pyo3(signature = (matrices, steps, depth = 8, assert_unit_jsr = false, tol = 1e-9))]
fn escape_trajectory(
    matrices: Vec<PyMat>,
    steps: usize,
    depth: usize,
    assert_unit_jsr: bool,
    tol: f64,
) -> PyResult<(String, Vec<f64>)> {
    let set = matrix_set(matrices, tol)?;
    let v = ps::classify_with(&set, &options(depth, None, assert_unit_jsr, tol)).map_err(to_py_err)?;
    let witness = match (v.regime, v.witness) {
        (ps::Regime::MarginallyUnstable, Some(w)) => w,
        (regime, _) => {
            return Err(NotMarginallyUnstable::new_err(format!("classified as {regime:?}")));
        }
    };
    let t = ps::simulate(&set, &witness.sequence, &witness.v0, steps).map_err(to_py_err)?;
    Ok((format!("{:?}", witness.case_tag), t.norms))
}

#[pymodule(name = "planar_switching")]
fn planar_switching_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("AnalysisError", py.get_type::<AnalysisError>())?;
    m.add("WorkBudgetExceeded", py.get_type::<WorkBudgetExceeded>())?;
    m.add("NotMarginallyUnstable", py.get_type::<NotMarginallyUnstable>())?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(operator_norm, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(jsr_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(rate_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(escape_trajectory, m)?)?;
    Ok(())
}
