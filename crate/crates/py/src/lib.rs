//! Python bindings. Vectors cross the boundary as lists of floats and matrices
//! as lists of rows.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stochcone_core::applications::{self, Economy};
use stochcone_core::cone::{self, ConeCertificate};
use stochcone_core::inequalities;
use stochcone_core::kernel::{self, KernelSpec};
use stochcone_core::suite::{self, TrialConfig};
use stochcone_core::transforms::{self, SeriesOptions};
use stochcone_core::{Error, PosVec, PositiveOperator, WeightedSpace};

create_exception!(stochcone, RejectedError, PyValueError, "Vector is not in the cone.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Rejected(r) => RejectedError::new_err((r.to_string(), r.index, r.violation)),
        Error::Overflow(_) => PyOverflowError::new_err(e.to_string()),
        Error::Convergence(_) | Error::InternalConsistency { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for stochcone_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn rows_of(s: &PositiveOperator) -> Vec<Vec<f64>> {
    s.rows().map(<[f64]>::to_vec).collect()
}

/// Non-negative matrix acting on a finite weighted space by `(Sx)_i = Σ_j s_ij x_j w_j`.
#[pyclass(name = "Operator", module = "stochcone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOperator {
    inner: PositiveOperator,
}

impl PyOperator {
    fn vector(&self, v: Vec<f64>) -> PyResult<PosVec> {
        PosVec::new(self.inner.space(), v).py()
    }

    fn certify(&self, f: Vec<f64>, tol: f64) -> PyResult<ConeCertificate> {
        cone::in_cone(&self.inner, &self.vector(f)?, tol).py()
    }
}

#[pymethods]
impl PyOperator {
    /// `weights` defaults to all ones.
    #[new]
    #[pyo3(signature = (matrix, weights = None))]
    fn new(matrix: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let space = match weights {
            Some(w) => WeightedSpace::new(w),
            None => WeightedSpace::uniform(matrix.len()),
        }
        .py()?;
        let inner = PositiveOperator::from_rows(&space, &matrix).py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.space().weights().to_vec()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner)
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.apply(&self.vector(x)?).py()?.into_values())
    }

    fn column_mass(&self) -> Vec<f64> {
        self.inner.column_mass().into_values()
    }

    /// One of `stochastic`, `strictly-substochastic`,
    /// `substochastic-not-stochastic`, `not-substochastic`.
    #[pyo3(signature = (tol = 1e-12))]
    fn classify(&self, tol: f64) -> String {
        self.inner.classify(tol).to_string()
    }

    /// `(estimate, converged)`
    #[pyo3(signature = (iters = 10_000, tol = 1e-12))]
    fn spectral_radius(&self, iters: usize, tol: f64) -> (f64, bool) {
        let e = transforms::spectral_radius(&self.inner, iters, tol);
        (e.value, e.converged)
    }

    /// Returns the slack `f − Sf`; raises `RejectedError` naming the first bad entry.
    #[pyo3(signature = (f, tol = 1e-12))]
    fn check_cone(&self, f: Vec<f64>, tol: f64) -> PyResult<Vec<f64>> {
        Ok(self.certify(f, tol)?.slack().values().to_vec())
    }

    #[pyo3(signature = (f, tol = 1e-12))]
    fn in_cone(&self, f: Vec<f64>, tol: f64) -> PyResult<bool> {
        match cone::in_cone(&self.inner, &self.vector(f)?, tol) {
            Ok(_) => Ok(true),
            Err(Error::Rejected(_)) => Ok(false),
            Err(e) => Err(to_py(e)),
        }
    }

    /// Stochastic majorant `A ≥ S` with `Af = f`.
    #[pyo3(signature = (f, tol = 1e-12))]
    fn complete(&self, f: Vec<f64>, tol: f64) -> PyResult<PyCompletion> {
        let cert = self.certify(f, tol)?;
        let c = cone::stochastic_completion(&self.inner, &cert).py()?;
        Ok(c.into())
    }

    /// Entrywise `Π f_k^{α_k}` of cone elements.
    #[pyo3(signature = (fs, alphas, tol = 1e-12))]
    fn combine(&self, fs: Vec<Vec<f64>>, alphas: Vec<f64>, tol: f64) -> PyResult<Vec<f64>> {
        let certs = fs
            .into_iter()
            .map(|f| self.certify(f, tol))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(cone::log_convex_combine(&certs, &alphas).py()?.f().values().to_vec())
    }

    fn exp_apply(&self, f: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = transforms::exp_apply(&self.inner, &self.vector(f)?, &SeriesOptions::default());
        Ok(g.py()?.into_values())
    }

    /// `(λI − S)⁻¹ f`; needs `λ` above the spectral radius.
    #[pyo3(signature = (f, lam = 1.0))]
    fn resolvent_apply(&self, f: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
        let g = transforms::resolvent_apply(&self.inner, lam, &self.vector(f)?, &SeriesOptions::default());
        Ok(g.py()?.into_values())
    }

    fn leontief_solve(&self, demand: Vec<f64>) -> PyResult<Vec<f64>> {
        let e = Economy::new(self.inner.clone()).py()?;
        Ok(applications::leontief_solve(&e, &self.vector(demand)?).py()?.into_values())
    }

    /// `∂p_i/∂c_j` as a list of rows.
    fn impact_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        let e = Economy::new(self.inner.clone()).py()?;
        Ok(rows_of(&applications::impact_matrix(&e).py()?))
    }

    fn pagerank_solve(&self, births: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(applications::pagerank_solve(&self.inner, &self.vector(births)?).py()?.into_values())
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, class={})", self.inner.dim(), self.inner.classify(1e-12))
    }
}

#[pyclass(name = "Completion", module = "stochcone", frozen, get_all)]
struct PyCompletion {
    a: PyOperator,
    phi: Vec<f64>,
    psi: Vec<f64>,
    lam: f64,
}

impl From<cone::Completion> for PyCompletion {
    fn from(c: cone::Completion) -> Self {
        Self {
            a: PyOperator { inner: c.a },
            phi: c.phi.into_values(),
            psi: c.psi.into_values(),
            lam: c.lambda,
        }
    }
}

#[pymethods]
impl PyCompletion {
    fn __repr__(&self) -> String {
        format!("Completion(lam={:e}, dim={})", self.lam, self.a.inner.dim())
    }
}

#[pyfunction]
fn young_eval(x: f64, y: f64, alpha: f64, t: f64) -> PyResult<f64> {
    inequalities::young_eval(x, y, alpha, t).py()
}

/// `(t*, minimum)`
#[pyfunction]
fn young_argmin(x: f64, y: f64, alpha: f64) -> PyResult<(f64, f64)> {
    inequalities::young_argmin(x, y, alpha).py()
}

/// One dict per property with keys `name`, `trials`, `failures`, `worst`,
/// `worst_seed`, `passed`.
#[pyfunction]
#[pyo3(signature = (seed = 42, trials = 1000, n_min = 2, n_max = 20, m_min = 1, m_max = 4, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn run_property_suite<'py>(
    py: Python<'py>,
    seed: u64,
    trials: usize,
    n_min: usize,
    n_max: usize,
    m_min: usize,
    m_max: usize,
    tol: f64,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let cfg = TrialConfig {
        n_range: (n_min, n_max),
        m_range: (m_min, m_max),
        trials,
        seed,
        tol,
        ..TrialConfig::default()
    };
    let reports = py.detach(|| suite::run_property_suite(&cfg)).py()?;
    reports
        .into_iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("name", r.property_name)?;
            d.set_item("trials", r.trials_run)?;
            d.set_item("failures", r.failures)?;
            d.set_item("worst", r.worst_violation)?;
            d.set_item("worst_seed", r.worst_seed)?;
            d.set_item("passed", r.pass)?;
            Ok(d)
        })
        .collect()
}

/// Midpoint discretisation of a named kernel (`const:<c>`, `sum`, `product`,
/// `quadratic`) on `n` nodes.
#[pyfunction]
fn discretize_kernel(name: &str, n: usize) -> PyResult<PyOperator> {
    let (_, inner) = kernel::discretize(&KernelSpec::named(name, n).py()?).py()?;
    Ok(PyOperator { inner })
}

#[pyfunction]
fn kernel_completion_demo(name: &str, n: usize) -> PyResult<PyCompletion> {
    let c = kernel::continuous_completion_demo(&KernelSpec::named(name, n).py()?).py()?;
    Ok(c.into())
}

/// `[(n, mass_error, holder_violation), ...]`
#[pyfunction]
fn refinement_study(name: &str, ns: Vec<usize>) -> PyResult<Vec<(usize, f64, f64)>> {
    let spec = KernelSpec::named(name, 1).py()?;
    let rows = kernel::refinement_study(&spec, &ns).py()?;
    Ok(rows
        .into_iter()
        .map(|r| (r.n, r.mass_error, r.holder_violation))
        .collect())
}

/// Fixed-point wedges of substochastic operators on weighted sequence spaces.
#[pymodule]
fn stochcone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyCompletion>()?;
    m.add("RejectedError", m.py().get_type::<RejectedError>())?;
    m.add_function(wrap_pyfunction!(young_eval, m)?)?;
    m.add_function(wrap_pyfunction!(young_argmin, m)?)?;
    m.add_function(wrap_pyfunction!(run_property_suite, m)?)?;
    m.add_function(wrap_pyfunction!(discretize_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_completion_demo, m)?)?;
    m.add_function(wrap_pyfunction!(refinement_study, m)?)?;
    Ok(())
}
