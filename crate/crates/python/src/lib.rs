//! Python bindings: model parameters, the Gaussian particle state, exact and
//! asymptotic survival probability and purity, peak analysis and sweeps.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qdistill_core::cavity::{self, CavityState, GaussianParticleState, ModelParams};
use qdistill_core::spectral::{analyze, run_series, Distiller};
use qdistill_core::Error;

create_exception!(qdistill, NumericalError, PyRuntimeError, "Quadrature, peak search or normalization failed.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidState(_)
        | Error::InvalidParams(_)
        | Error::StroboscopicDecoupling { .. }
        | Error::InvalidArgument(_)
        | Error::WrongCavity { .. } => PyValueError::new_err(e.to_string()),
        other => NumericalError::new_err(format!("{other:?}: {other}")),
    }
}

#[pyclass(name = "ModelParams", frozen)]
struct PyModelParams {
    inner: ModelParams,
}

#[pymethods]
impl PyModelParams {
    /// Coherent cavity state `|α⟩` with `α = alpha_mod·e^{iγ}`.
    #[staticmethod]
    fn coherent(omega_tau: f64, g_tilde: f64, alpha_mod: f64, gamma: f64) -> PyResult<Self> {
        let inner = ModelParams::coherent(omega_tau, g_tilde, alpha_mod, gamma).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Cavity prepared and measured in the number state `|1⟩`.
    #[staticmethod]
    fn number_one(omega_tau: f64, g_tilde: f64) -> PyResult<Self> {
        let inner = ModelParams::number_one(omega_tau, g_tilde).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn omega_tau(&self) -> f64 {
        self.inner.omega_tau
    }

    #[getter]
    fn g_tilde(&self) -> f64 {
        self.inner.g_tilde
    }

    #[getter]
    fn cavity(&self) -> &'static str {
        match self.inner.cavity {
            CavityState::Coherent { .. } => "coherent",
            CavityState::NumberOne => "number_one",
        }
    }

    /// Momentum the filter selects.
    fn selected_momentum(&self) -> f64 {
        cavity::selected_momentum(&self.inner)
    }

    /// `Λ″(p*)`: 2G² for a coherent state, 6G² for `|1⟩`.
    fn filter_curvature(&self) -> f64 {
        cavity::filter_curvature(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "ParticleState", frozen)]
struct PyParticleState {
    inner: GaussianParticleState,
}

#[pymethods]
impl PyParticleState {
    #[new]
    #[pyo3(signature = (p0, x0, dp0, dx0, pi0))]
    fn new(p0: f64, x0: f64, dp0: f64, dx0: f64, pi0: f64) -> PyResult<Self> {
        let inner = GaussianParticleState::new(p0, x0, dp0, dx0, pi0).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }

    #[getter]
    fn dp0(&self) -> f64 {
        self.inner.dp0
    }

    #[getter]
    fn pi0(&self) -> f64 {
        self.inner.pi0
    }

    /// Trace of the initial density, by quadrature.
    fn trace(&self) -> PyResult<f64> {
        let rho = cavity::initial_density(&self.inner).map_err(to_py)?;
        rho.trace(Default::default()).map_err(to_py)
    }

    /// Purity of the initial density, by quadrature.
    fn purity(&self) -> PyResult<f64> {
        let rho = cavity::initial_density(&self.inner).map_err(to_py)?;
        rho.purity(Default::default()).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn with_distiller<T>(
    params: &PyModelParams,
    state: &PyParticleState,
    f: impl FnOnce(&Distiller<'_>) -> Result<T, Error>,
) -> PyResult<T> {
    let kernel = cavity::spectral_kernel(&params.inner, &state.inner).map_err(to_py)?;
    let rho = cavity::initial_density(&state.inner).map_err(to_py)?;
    f(&Distiller::new(&kernel, &rho)).map_err(to_py)
}

/// `P(N)` by quadrature over the spectrum.
#[pyfunction]
fn survival_exact(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    with_distiller(&params, &state, |d| d.survival_exact(n))
}

/// `Π(N)` by quadrature over the spectrum.
#[pyfunction]
fn purity_exact(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    with_distiller(&params, &state, |d| d.purity_exact(n))
}

/// Laplace estimate of `P(N)` as `(value, leading_order)`.
#[pyfunction]
fn survival_asymptotic(
    params: PyRef<'_, PyModelParams>,
    state: PyRef<'_, PyParticleState>,
    n: u32,
) -> PyResult<(f64, f64)> {
    with_distiller(&params, &state, |d| d.survival_asymptotic(n).map(|a| (a.value, a.leading)))
}

/// Laplace estimate of `Π(N)`.
#[pyfunction]
fn purity_asymptotic(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    with_distiller(&params, &state, |d| d.purity_asymptotic(n).map(|a| a.value))
}

#[pyfunction]
fn survival_closed_coherent(
    params: PyRef<'_, PyModelParams>,
    state: PyRef<'_, PyParticleState>,
    n: u32,
) -> PyResult<f64> {
    cavity::survival_closed_coherent(&params.inner, &state.inner, n).map_err(to_py)
}

#[pyfunction]
fn purity_closed_coherent(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    cavity::purity_closed_coherent(&params.inner, &state.inner, n).map_err(to_py)
}

#[pyfunction]
fn survival_asym_number1(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    cavity::survival_asym_number1(&params.inner, &state.inner, n).map_err(to_py)
}

#[pyfunction]
fn purity_asym_closed(params: PyRef<'_, PyModelParams>, state: PyRef<'_, PyParticleState>, n: u32) -> PyResult<f64> {
    cavity::purity_asym_closed(&params.inner, &state.inner, n).map_err(to_py)
}

/// Peak of `|λ_p|`: dict with `e_star`, `big_lambda_star`, `curvature`.
#[pyfunction]
fn peak<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    state: PyRef<'py, PyParticleState>,
) -> PyResult<Bound<'py, PyDict>> {
    let kernel = cavity::spectral_kernel(&params.inner, &state.inner).map_err(to_py)?;
    let data = analyze(&kernel).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("e_star", data.e_star)?;
    d.set_item("big_lambda_star", data.big_lambda_star + 0.0)?;
    d.set_item("curvature", data.curvature)?;
    Ok(d)
}

/// One dict per `N` with exact and asymptotic values; asymptotic entries are
/// `None` at `N = 0`. Raises on the first failing row.
#[pyfunction]
fn sweep<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    state: PyRef<'py, PyParticleState>,
    n_values: Vec<u32>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kernel = cavity::spectral_kernel(&params.inner, &state.inner).map_err(to_py)?;
    let rho = cavity::initial_density(&state.inner).map_err(to_py)?;
    let series = run_series(&kernel, &rho, &n_values).map_err(to_py)?;
    let mut out = Vec::with_capacity(series.rows.len());
    for row in series.rows {
        let row = row.map_err(|e| NumericalError::new_err(format!("N = {}: {:?}: {}", e.n, e.error, e.error)))?;
        let d = PyDict::new(py);
        d.set_item("n", row.n)?;
        d.set_item("p_exact", row.p_exact)?;
        d.set_item("pi_exact", row.pi_exact)?;
        d.set_item("p_asym", row.p_asym_leading)?;
        d.set_item("pi_asym", row.pi_asym)?;
        d.set_item("delta_n", row.delta_n)?;
        out.push(d);
    }
    Ok(out)
}

#[pymodule]
fn qdistill(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyParticleState>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(survival_exact, m)?)?;
    m.add_function(wrap_pyfunction!(purity_exact, m)?)?;
    m.add_function(wrap_pyfunction!(survival_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(purity_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(survival_closed_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(purity_closed_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(survival_asym_number1, m)?)?;
    m.add_function(wrap_pyfunction!(purity_asym_closed, m)?)?;
    m.add_function(wrap_pyfunction!(peak, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
