//! Python bindings. Reactions, travelling waves, moving-boundary runs and the
//! asymptotic evaluators are exposed as thin wrappers over the Rust types.

use cutoff_kpp::asym_large::{solve_basis, LargeTimeCase};
use cutoff_kpp::asym_small::{sdot_minimum_estimate, InnerCorrection, SmallTimeCoefficients};
use cutoff_kpp::harness::{run_experiment as run_harness, ExperimentConfig, BASIS_TOL, PTW_TOL};
use cutoff_kpp::ptw::{shoot_speed, WaveSolution};
use cutoff_kpp::qivp::{run, QivpParams, COARSE_DY};
use cutoff_kpp::{numerics, Error, ReactionSpec};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(
    cutoff_kpp_py,
    KppError,
    PyValueError,
    "Error raised by the numerical core."
);

fn err(e: Error) -> PyErr {
    KppError::new_err(e.to_string())
}

/// A KPP reaction with a cut-off.
#[pyclass(name = "Reaction", frozen, skip_from_py_object, module = "cutoff_kpp_py")]
#[derive(Clone)]
struct PyReaction(ReactionSpec);

#[pymethods]
impl PyReaction {
    /// Fisher reaction `u (1 - u)` cut off below `u_c`.
    #[staticmethod]
    fn fisher(u_c: f64) -> PyResult<Self> {
        ReactionSpec::fisher(u_c).map(Self).map_err(err)
    }

    /// Piecewise-linear reaction with rate `lam`.
    #[staticmethod]
    #[pyo3(name = "piecewise_linear")]
    fn piecewise_linear(lam: f64, u_c: f64) -> PyResult<Self> {
        ReactionSpec::piecewise_linear(lam, u_c).map(Self).map_err(err)
    }

    #[getter]
    fn u_c(&self) -> f64 {
        self.0.u_c()
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_owned()
    }

    /// Reaction term with the cut-off applied.
    fn f_c(&self, u: f64) -> f64 {
        self.0.cutoff(u)
    }

    fn __repr__(&self) -> String {
        format!("Reaction({}, u_c={})", self.0.name(), self.0.u_c())
    }
}

/// Permanent-form travelling wave.
#[pyclass(name = "Wave", frozen, module = "cutoff_kpp_py")]
struct PyWave(WaveSolution);

#[pymethods]
impl PyWave {
    #[getter]
    fn v_star(&self) -> f64 {
        self.0.v_star()
    }

    #[getter]
    fn lambda_plus(&self) -> f64 {
        self.0.lambda_plus()
    }

    #[getter]
    fn a_minus_inf(&self) -> f64 {
        self.0.a_minus_inf()
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().to_vec()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u().to_vec()
    }

    /// Profile value at `y`, including the closed-form right tail.
    fn __call__(&self, y: f64) -> f64 {
        self.0.eval(y)
    }
}

/// Result of a moving-boundary run.
#[pyclass(name = "Simulation", frozen, get_all, module = "cutoff_kpp_py")]
struct PySimulation {
    y: Vec<f64>,
    t: Vec<f64>,
    s: Vec<f64>,
    sdot: Vec<f64>,
    snapshot_times: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
    v_inf: f64,
    steps: usize,
}

/// Shoots for the minimal wave speed and tabulates the profile.
#[pyfunction]
#[pyo3(signature = (reaction, tol = PTW_TOL))]
fn wave(py: Python<'_>, reaction: &PyReaction, tol: f64) -> PyResult<PyWave> {
    let spec = reaction.0.clone();
    py.detach(move || shoot_speed(&spec, tol)).map(PyWave).map_err(err)
}

/// Runs the moving-boundary scheme from step initial data up to `t_final`.
#[pyfunction]
#[pyo3(signature = (reaction, t_final, dy = COARSE_DY, samples = Vec::new(), front_dt = 0.01))]
fn simulate(
    py: Python<'_>,
    reaction: &PyReaction,
    t_final: f64,
    dy: f64,
    samples: Vec<f64>,
    front_dt: f64,
) -> PyResult<PySimulation> {
    let spec = reaction.0.clone();
    let out = py
        .detach(move || {
            let params = QivpParams::auto(spec, dy, t_final)?
                .with_front_dt(front_dt)
                .with_samples(samples);
            params.validate()?;
            run(&params)
        })
        .map_err(err)?;
    Ok(PySimulation {
        v_inf: out.v_inf_estimate(),
        steps: out.steps,
        snapshot_times: out.snapshots.iter().map(|s| s.t).collect(),
        snapshots: out.snapshots.into_iter().map(|s| s.u).collect(),
        y: out.y,
        t: out.front.t,
        s: out.front.s,
        sdot: out.front.sdot,
    })
}

/// Small-time front coefficients as a dict; includes `t_m` when the speed
/// has a small-time minimum.
#[pyfunction]
fn small_time(py: Python<'_>, reaction: &PyReaction) -> PyResult<Py<pyo3::types::PyDict>> {
    let c = SmallTimeCoefficients::compute(&reaction.0).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("u_c", c.u_c)?;
    d.set_item("s0", c.s0)?;
    d.set_item("s1", c.s1)?;
    d.set_item("d_hat1", c.d_hat1)?;
    d.set_item("d1", c.d1)?;
    d.set_item("d2", c.d2)?;
    d.set_item("t_m", sdot_minimum_estimate(&c).map(|m| m.t_m))?;
    Ok(d.unbind())
}

/// First-order inner correction at each `eta`.
#[pyfunction]
fn inner_correction(reaction: &PyReaction, eta: Vec<f64>) -> PyResult<Vec<f64>> {
    let inner = InnerCorrection::new(&reaction.0).map_err(err)?;
    eta.into_iter().map(|e| inner.eval(e).map_err(err)).collect()
}

/// Large-time classification as a dict.
#[pyfunction]
fn large_time(py: Python<'_>, reaction: &PyReaction) -> PyResult<Py<pyo3::types::PyDict>> {
    let spec = reaction.0.clone();
    let c = py
        .detach(move || {
            let ws = shoot_speed(&spec, PTW_TOL)?;
            solve_basis(&spec, &ws, BASIS_TOL)
        })
        .map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("v_star", c.v_star)?;
    d.set_item("phi0", c.phi_plus_0)?;
    d.set_item("dphi0", c.dphi_plus_0)?;
    d.set_item("E4_over_AL", c.e4_over_al)?;
    d.set_item("c3_over_AL", c.c3_over_al)?;
    d.set_item("case", if c.case == LargeTimeCase::I { "I" } else { "II" })?;
    d.set_item("gamma", c.gamma)?;
    d.set_item("warning", c.warning)?;
    Ok(d.unbind())
}

/// Runs one experiment from `key=value` config text. Returns
/// `(passed, csv_text, summary_lines)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<(bool, String, Vec<String>)> {
    let cfg = ExperimentConfig::parse(config).map_err(err)?;
    py.detach(move || {
        let report = run_harness(&cfg)?;
        Ok((report.passed(), report.table().to_csv()?, report.summary()))
    })
    .map_err(err)
}

#[pyfunction]
fn erf(x: f64) -> f64 {
    numerics::erf(x)
}

#[pyfunction]
fn erf_inv(p: f64) -> PyResult<f64> {
    numerics::erf_inv(p).map_err(err)
}

#[pymodule]
fn cutoff_kpp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KppError", m.py().get_type::<KppError>())?;
    m.add_class::<PyReaction>()?;
    m.add_class::<PyWave>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(wave, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(small_time, m)?)?;
    m.add_function(wrap_pyfunction!(inner_correction, m)?)?;
    m.add_function(wrap_pyfunction!(large_time, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(erf, m)?)?;
    m.add_function(wrap_pyfunction!(erf_inv, m)?)?;
    Ok(())
}
