use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use wpa_core::dwell::{dwell_report, SpatialInterval};
use wpa_core::{DensityTrace, Error, QuadratureConfig, Route, StateSpec, TimeGrid};

create_exception!(wpa, NumericalError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        NumericalError::new_err(e.to_string())
    }
}

fn parse_route(route: &str) -> PyResult<Route> {
    match route {
        "closed_form" => Ok(Route::ClosedForm),
        "quadrature" => Ok(Route::Quadrature),
        other => Err(PyValueError::new_err(format!(
            "route must be 'closed_form' or 'quadrature', got {other:?}"
        ))),
    }
}

fn config(rel_tol: Option<f64>) -> PyResult<QuadratureConfig> {
    match rel_tol {
        None => Ok(QuadratureConfig::default()),
        Some(t) => QuadratureConfig::default().with_rel_tol(t).map_err(to_py),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// `hbar` and `m`; atomic units by default.
#[pyclass(frozen, from_py_object, module = "wpa")]
#[derive(Clone, Copy)]
struct UnitSystem {
    inner: wpa_core::UnitSystem,
}

#[pymethods]
impl UnitSystem {
    #[new]
    #[pyo3(signature = (hbar = 1.0, mass = 1.0))]
    fn new(hbar: f64, mass: f64) -> PyResult<Self> {
        Ok(UnitSystem {
            inner: wpa_core::UnitSystem::new(hbar, mass).map_err(to_py)?,
        })
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn __repr__(&self) -> String {
        format!("UnitSystem(hbar={}, mass={})", self.inner.hbar(), self.inner.mass())
    }
}

/// An initial state, bound to the unit system it was normalised in.
#[pyclass(frozen, skip_from_py_object, module = "wpa")]
#[derive(Clone, Copy)]
struct WavePacket {
    inner: wpa_core::WavePacket,
    units: wpa_core::UnitSystem,
}

fn units_or_atomic(units: Option<UnitSystem>) -> wpa_core::UnitSystem {
    units.map(|u| u.inner).unwrap_or_else(wpa_core::UnitSystem::atomic)
}

fn packet(inner: wpa_core::Result<wpa_core::WavePacket>, units: wpa_core::UnitSystem) -> PyResult<WavePacket> {
    Ok(WavePacket {
        inner: inner.map_err(to_py)?,
        units,
    })
}

#[pymethods]
impl WavePacket {
    #[staticmethod]
    #[pyo3(signature = (alpha = 0.5, delta = 1.0, p0 = 1.0, x0 = -10.0, units = None))]
    fn truncated_gaussian(alpha: f64, delta: f64, p0: f64, x0: f64, units: Option<UnitSystem>) -> PyResult<Self> {
        let u = units_or_atomic(units);
        packet(wpa_core::WavePacket::truncated_gaussian(alpha, delta, p0, x0, &u), u)
    }

    #[staticmethod]
    #[pyo3(signature = (delta = 1.0, p0 = 1.0, x0 = -10.0, units = None))]
    fn gaussian(delta: f64, p0: f64, x0: f64, units: Option<UnitSystem>) -> PyResult<Self> {
        let u = units_or_atomic(units);
        packet(wpa_core::WavePacket::gaussian(delta, p0, x0, &u), u)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha = 1.0, units = None))]
    fn lorentzian_squared(alpha: f64, units: Option<UnitSystem>) -> PyResult<Self> {
        packet(wpa_core::WavePacket::lorentzian_squared(alpha), units_or_atomic(units))
    }

    #[staticmethod]
    #[pyo3(signature = (beta = 1.0, units = None))]
    fn linear_gaussian(beta: f64, units: Option<UnitSystem>) -> PyResult<Self> {
        packet(wpa_core::WavePacket::linear_gaussian(beta), units_or_atomic(units))
    }

    #[staticmethod]
    #[pyo3(signature = (c1, c2, cutoff = 1.0, units = None))]
    fn taylor_stub(c1: Complex64, c2: Complex64, cutoff: f64, units: Option<UnitSystem>) -> PyResult<Self> {
        packet(wpa_core::WavePacket::taylor_stub(c1, c2, cutoff), units_or_atomic(units))
    }

    /// `"state=gaussian delta=2 ..."` or the equivalent JSON object.
    #[staticmethod]
    #[pyo3(signature = (spec, units = None))]
    fn from_spec(spec: &str, units: Option<UnitSystem>) -> PyResult<Self> {
        let u = units_or_atomic(units);
        let parsed = StateSpec::parse(spec).map_err(to_py)?;
        packet(parsed.build(&u), u)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn units(&self) -> UnitSystem {
        UnitSystem { inner: self.units }
    }

    fn momentum_amplitude(&self, p: f64) -> Complex64 {
        self.inner.momentum_amplitude(p, &self.units)
    }

    /// `(c1, c2)` of the amplitude at `p = 0+`.
    fn taylor_coefficients(&self) -> (Complex64, Complex64) {
        let tc = self.inner.taylor_coefficients(&self.units);
        (tc.c1, tc.c2)
    }

    fn normalization_constant(&self) -> PyResult<f64> {
        self.inner.normalization_constant().map_err(to_py)
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serialisable state")
    }

    fn __repr__(&self) -> String {
        format!("WavePacket({})", self.to_json())
    }
}

#[pyfunction]
fn w(z: Complex64) -> PyResult<Complex64> {
    wpa_core::w(z).map_err(to_py)
}

#[pyfunction]
fn w_derivative(z: Complex64) -> PyResult<Complex64> {
    wpa_core::w_derivative(z).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (z, n_terms = 40))]
fn w_series(z: Complex64, n_terms: usize) -> Complex64 {
    wpa_core::w_series(z, n_terms)
}

/// `psi(x, t)`.
#[pyfunction]
#[pyo3(signature = (state, x, t, route = "closed_form", rel_tol = None))]
fn evolve(state: &WavePacket, x: f64, t: f64, route: &str, rel_tol: Option<f64>) -> PyResult<Complex64> {
    wpa_core::evolve(&state.inner, x, t, &state.units, parse_route(route)?, &config(rel_tol)?).map_err(to_py)
}

/// Leading steepest-descent estimate of `psi(0, t)`.
#[pyfunction]
#[pyo3(signature = (c1, c2, t, units = None))]
fn asymptotic_prediction(c1: Complex64, c2: Complex64, t: f64, units: Option<UnitSystem>) -> PyResult<Complex64> {
    wpa_core::asymptotic_prediction(c1, c2, t, &units_or_atomic(units)).map_err(to_py)
}

/// `(times, densities)` on a log-spaced grid.
#[pyfunction]
#[pyo3(signature = (state, x, t_min, t_max, per_decade = 16, route = "closed_form"))]
fn density_trace(
    state: &WavePacket,
    x: f64,
    t_min: f64,
    t_max: f64,
    per_decade: usize,
    route: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = TimeGrid::new(t_min, t_max, per_decade).map_err(to_py)?;
    let trace = DensityTrace::compute(&state.inner, x, &grid, &state.units, parse_route(route)?, &QuadratureConfig::default())
        .map_err(to_py)?;
    Ok((grid.values().to_vec(), trace.density))
}

/// Fitted tail exponent and slope curve, as a dict.
#[pyfunction]
#[pyo3(signature = (state, x = 0.0, t_min = 0.1, t_max = 1e6, per_decade = 16, window = 1.5, route = "closed_form"))]
#[allow(clippy::too_many_arguments)]
fn fit_exponent<'py>(
    py: Python<'py>,
    state: &WavePacket,
    x: f64,
    t_min: f64,
    t_max: f64,
    per_decade: usize,
    window: f64,
    route: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = TimeGrid::new(t_min, t_max, per_decade).map_err(to_py)?;
    let trace = DensityTrace::compute(&state.inner, x, &grid, &state.units, parse_route(route)?, &QuadratureConfig::default())
        .map_err(to_py)?;
    let est = wpa_core::fit_exponent(&trace, window).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&est).expect("serialisable estimate"))
}

/// Dwell time in `[a, b]` by every route; divergent values are `"divergent"`.
#[pyfunction]
fn dwell<'py>(py: Python<'py>, state: &WavePacket, a: f64, b: f64) -> PyResult<Bound<'py, PyAny>> {
    let interval = SpatialInterval::new(a, b).map_err(to_py)?;
    let report = dwell_report(&state.inner, &interval, &state.units, &QuadratureConfig::default()).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&report).expect("serialisable report"))
}

#[pymodule]
fn wpa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<UnitSystem>()?;
    m.add_class::<WavePacket>()?;
    m.add_function(wrap_pyfunction!(w, m)?)?;
    m.add_function(wrap_pyfunction!(w_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(w_series, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(density_trace, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(dwell, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
