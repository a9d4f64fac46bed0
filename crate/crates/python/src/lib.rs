//! Python bindings. Scenarios and results cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use znd_core::suite::{run_suite, SuiteOptions};
use znd_core::{
    admissible_window, config_hash, parse_scenario_str, run, solve_downstream, solve_from_piston_speed, EosParams,
    Error, ThermoPoint, Thresholds, UpstreamState,
};

fn to_py(e: Error) -> PyErr {
    if e.is_configuration() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Piecewise equation of state; all functions take `(nu, s)`.
#[pyclass(frozen)]
struct Eos {
    inner: EosParams,
}

#[pymethods]
impl Eos {
    #[new]
    fn new(gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: EosParams::new(gamma).map_err(to_py)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn internal_energy(&self, nu: f64, s: f64) -> PyResult<f64> {
        self.inner.internal_energy(ThermoPoint::new(nu, s).map_err(to_py)?).map_err(to_py)
    }

    fn pressure(&self, nu: f64, s: f64) -> PyResult<f64> {
        self.inner.pressure(ThermoPoint::new(nu, s).map_err(to_py)?).map_err(to_py)
    }

    fn temperature(&self, nu: f64, s: f64) -> PyResult<f64> {
        self.inner.temperature(ThermoPoint::new(nu, s).map_err(to_py)?).map_err(to_py)
    }

    fn sound_speed(&self, nu: f64, s: f64) -> PyResult<f64> {
        self.inner.sound_speed(ThermoPoint::new(nu, s).map_err(to_py)?).map_err(to_py)
    }
}

/// Downstream state as `(nu, u, p, s, sigma)`.
type Point = (f64, f64, f64, f64, f64);

/// Quiescent upstream gas and its Hugoniot locus.
#[pyclass(frozen)]
struct Upstream {
    inner: UpstreamState,
}

#[pymethods]
impl Upstream {
    #[new]
    fn new(gamma: f64, nu0: f64, p0: f64) -> PyResult<Self> {
        let eos = EosParams::new(gamma).map_err(to_py)?;
        Ok(Self { inner: UpstreamState::new(eos, nu0, p0).map_err(to_py)? })
    }

    #[getter]
    fn sound_speed(&self) -> f64 {
        self.inner.c0
    }

    /// `(u1, u_o)`: the open interval of admissible piston speeds.
    fn window(&self) -> PyResult<(f64, f64)> {
        let w = admissible_window(&self.inner).map_err(to_py)?;
        Ok((w.u1, w.u_o))
    }

    fn locus_point(&self, nu: f64) -> PyResult<Point> {
        let p = solve_downstream(&self.inner, nu).map_err(to_py)?;
        Ok((p.nu, p.u, p.p, p.s, p.sigma))
    }

    fn background(&self, u_iota: f64) -> PyResult<Point> {
        let p = solve_from_piston_speed(&self.inner, u_iota).map_err(to_py)?;
        Ok((p.nu, p.u, p.p, p.s, p.sigma))
    }
}

/// Integrates a JSON scenario and returns the full time series as JSON.
#[pyfunction]
fn run_scenario(py: Python<'_>, scenario: &str) -> PyResult<String> {
    let cfg = parse_scenario_str(scenario).map_err(to_py)?;
    let series = py.detach(move || run(cfg)).map_err(to_py)?;
    serde_json::to_string(&series).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Runs the verification suite derived from a JSON scenario; returns the report as JSON.
#[pyfunction]
fn verify_scenario(py: Python<'_>, scenario: &str) -> PyResult<String> {
    let cfg = parse_scenario_str(scenario).map_err(to_py)?;
    let report = py.detach(move || run_suite(&cfg, &Thresholds::default(), &SuiteOptions::default())).map_err(to_py)?;
    Ok(report.to_json())
}

#[pyfunction]
fn scenario_hash(scenario: &str) -> PyResult<String> {
    Ok(config_hash(&parse_scenario_str(scenario).map_err(to_py)?))
}

#[pymodule]
fn znd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Eos>()?;
    m.add_class::<Upstream>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(verify_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_hash, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
