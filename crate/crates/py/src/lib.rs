//! Python bindings: the main types and operations of the simulator exposed
//! with plain floats, lists and dicts. Rates are 1/s, frequencies Hz, times
//! seconds, temperatures Kelvin, matching the core crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use szilard_core::{dynamics, estimator, model, thermo as core_thermo, trajectory};

fn err(e: szilard_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_level(target: &str) -> PyResult<model::QubitLevel> {
    match target {
        "g" | "ground" => Ok(model::QubitLevel::Ground),
        "e" | "excited" => Ok(model::QubitLevel::Excited),
        other => Err(PyValueError::new_err(format!(
            "unknown qubit level '{other}' (expected 'g' or 'e')"
        ))),
    }
}

/// Full parameter vector of the coupled qubit-TLS model.
#[pyclass(module = "szilard_py", skip_from_py_object)]
#[derive(Clone)]
struct SystemParams {
    inner: model::SystemParams,
}

#[pymethods]
impl SystemParams {
    /// p_th defaults to the thermal population of f01 at 28.3 mK.
    #[new]
    #[pyo3(signature = (f01_hz=1.2e9, gamma_q=10.9e3, p_th=None, a=5.0e3, b=0.48, c=0.0, n_tls=51, gamma_t=20.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        f01_hz: f64,
        gamma_q: f64,
        p_th: Option<f64>,
        a: f64,
        b: f64,
        c: f64,
        n_tls: usize,
        gamma_t: f64,
    ) -> PyResult<Self> {
        let p_th = match p_th {
            Some(p) => p,
            None => model::thermal_population(f01_hz, 0.0283).map_err(err)?,
        };
        let inner = model::SystemParams::new(
            model::QubitParams::new(f01_hz, gamma_q, p_th).map_err(err)?,
            model::LadderParams::new(a, b, c, n_tls, gamma_t).map_err(err)?,
        )
        .map_err(err)?;
        Ok(SystemParams { inner })
    }

    #[getter]
    fn f01_hz(&self) -> f64 {
        self.inner.qubit.f01
    }

    #[getter]
    fn gamma_q(&self) -> f64 {
        self.inner.qubit.gamma_q
    }

    #[getter]
    fn p_th(&self) -> f64 {
        self.inner.qubit.p_th
    }

    #[getter]
    fn n_tls(&self) -> usize {
        self.inner.ladder.n_tls
    }

    /// Total qubit relaxation rate gamma_q + sum_k gamma_qt(k) in 1/s.
    fn gamma_1(&self) -> PyResult<f64> {
        self.inner.gamma_1().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(f01_hz={}, gamma_q={}, p_th={}, a={}, b={}, c={}, n_tls={}, gamma_t={})",
            self.inner.qubit.f01,
            self.inner.qubit.gamma_q,
            self.inner.qubit.p_th,
            self.inner.ladder.a,
            self.inner.ladder.b,
            self.inner.ladder.c,
            self.inner.ladder.n_tls,
            self.inner.ladder.gamma_t
        )
    }
}

/// Protocol schedule builder.
#[pyclass(module = "szilard_py", skip_from_py_object)]
#[derive(Clone)]
struct Experiment {
    inner: model::Experiment,
}

#[pymethods]
impl Experiment {
    /// A protocol starting from the thermal state.
    #[new]
    fn new() -> Self {
        Experiment { inner: model::Experiment::thermal() }
    }

    /// A protocol starting from explicit populations.
    #[staticmethod]
    fn with_initial(p_q: f64, p_t: Vec<f64>) -> PyResult<Self> {
        let state = model::PopulationState::new(p_q, p_t, 0.0).map_err(err)?;
        Ok(Experiment {
            inner: model::Experiment::new(model::InitialState::Explicit(state)),
        })
    }

    fn stabilize(&mut self, target: &str, repetitions: usize, t_rep: f64) -> PyResult<()> {
        let target = parse_level(target)?;
        self.inner.steps.push(model::Step::Stabilize { target, repetitions, t_rep });
        Ok(())
    }

    fn initialize(&mut self, target: &str) -> PyResult<()> {
        let target = parse_level(target)?;
        self.inner.steps.push(model::Step::Initialize { target });
        Ok(())
    }

    fn monitor(&mut self, duration: f64, t_rep: f64) {
        self.inner.steps.push(model::Step::Monitor { duration, t_rep });
    }

    fn pi_pulse_train(&mut self, count: usize, spacing: f64) {
        self.inner.steps.push(model::Step::PiPulseTrain { count, spacing });
    }

    fn free_decay(&mut self, duration: f64) {
        self.inner.steps.push(model::Step::FreeDecay { duration });
    }

    fn wait(&mut self, duration: f64) {
        self.inner.steps.push(model::Step::Wait { duration });
    }

    fn total_duration(&self) -> f64 {
        self.inner.total_duration()
    }
}

/// Dispersive readout model.
#[pyclass(module = "szilard_py", skip_from_py_object)]
#[derive(Clone)]
struct ReadoutModel {
    inner: trajectory::ReadoutModel,
}

#[pymethods]
impl ReadoutModel {
    #[new]
    #[pyo3(signature = (separation_sigma=5.6, demolition_down=0.04, demolition_up=0.0))]
    fn new(separation_sigma: f64, demolition_down: f64, demolition_up: f64) -> PyResult<Self> {
        let inner = trajectory::ReadoutModel {
            separation_sigma,
            demolition_down,
            demolition_up,
            centers: [[0.0, 0.0], [separation_sigma, 0.0]],
        };
        inner.validate().map_err(err)?;
        Ok(ReadoutModel { inner })
    }

    /// No demolition, negligible misassignment.
    #[staticmethod]
    fn ideal() -> Self {
        ReadoutModel { inner: trajectory::ReadoutModel::ideal() }
    }
}

/// Ladder coupling rates gamma_qt(k) in 1/s.
#[pyfunction]
fn coupling_ladder(params: &SystemParams) -> PyResult<Vec<f64>> {
    model::coupling_ladder(&params.inner.ladder).map_err(err)
}

/// Sum of the ladder coupling rates in 1/s.
#[pyfunction]
fn total_coupling(params: &SystemParams) -> PyResult<f64> {
    model::total_coupling(&params.inner.ladder).map_err(err)
}

/// (g, delta) in 1/s for a given combined dephasing rate.
#[pyfunction]
fn derive_g_delta(params: &SystemParams, gamma_phi: f64) -> PyResult<(f64, f64)> {
    model::derive_g_delta(&params.inner.ladder, gamma_phi).map_err(err)
}

#[pyfunction]
fn thermal_population(f_hz: f64, t_kelvin: f64) -> PyResult<f64> {
    model::thermal_population(f_hz, t_kelvin).map_err(err)
}

#[pyfunction]
fn population_to_temperature(p: f64, f_hz: f64) -> PyResult<f64> {
    model::population_to_temperature(p, f_hz).map_err(err)
}

#[pyfunction]
fn multilevel_thermal(levels_hz: Vec<f64>, t_kelvin: f64) -> PyResult<Vec<f64>> {
    model::multilevel_thermal(&levels_hz, t_kelvin).map_err(err)
}

/// Deterministic protocol run sampled at `times` (seconds on the observation
/// clock). Returns a dict with times, p_q, p_eq, gamma_up and gamma_down.
#[pyfunction]
fn run_deterministic<'py>(
    py: Python<'py>,
    params: &SystemParams,
    experiment: &Experiment,
    times: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let result = dynamics::run_deterministic(
        &experiment.inner,
        &params.inner,
        &dynamics::SampleGrid::Times(times),
    )
    .map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("times", result.times)?;
    dict.set_item("p_q", result.p_q)?;
    dict.set_item("p_eq", result.p_eq)?;
    dict.set_item("gamma_up", result.gamma_up)?;
    dict.set_item("gamma_down", result.gamma_down)?;
    Ok(dict)
}

/// Reservoir heat-extraction curve after one qubit reset from equilibrium.
#[pyfunction]
fn heat_extraction_curve<'py>(
    py: Python<'py>,
    params: &SystemParams,
    temperature: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let curve = dynamics::heat_extraction_curve(&params.inner, temperature).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("times", curve.times)?;
    dict.set_item("dq_r", curve.dq_r)?;
    dict.set_item("peak", curve.peak)?;
    dict.set_item("peak_time", curve.peak_time)?;
    Ok(dict)
}

/// Ensemble excited fraction at every monitor strobe.
#[pyfunction]
fn run_population_series<'py>(
    py: Python<'py>,
    params: &SystemParams,
    readout: &ReadoutModel,
    experiment: &Experiment,
    t_rep: f64,
    master_seed: u64,
    n_traj: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let ensemble = trajectory::run_ensemble(
        &experiment.inner,
        &params.inner,
        &readout.inner,
        master_seed,
        n_traj,
    )
    .map_err(err)?;
    let series = estimator::population_series(&ensemble, t_rep).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("times", series.times)?;
    dict.set_item("p_q", series.p_q)?;
    dict.set_item("stderr", series.stderr)?;
    Ok(dict)
}

/// Transition rates extracted from a simulated quantum-jump ensemble.
/// Missing entries come back as None.
#[pyfunction]
#[pyo3(signature = (params, readout, experiment, t_rep, master_seed, n_traj, smooth_window=1))]
fn run_rate_series<'py>(
    py: Python<'py>,
    params: &SystemParams,
    readout: &ReadoutModel,
    experiment: &Experiment,
    t_rep: f64,
    master_seed: u64,
    n_traj: usize,
    smooth_window: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let ensemble = trajectory::run_ensemble(
        &experiment.inner,
        &params.inner,
        &readout.inner,
        master_seed,
        n_traj,
    )
    .map_err(err)?;
    let mut series = estimator::extract_rates(&ensemble, t_rep).map_err(err)?;
    if smooth_window > 1 {
        series = estimator::moving_average(&series, smooth_window).map_err(err)?;
    }
    let dict = PyDict::new(py);
    dict.set_item("times", series.times)?;
    dict.set_item("gamma_up", series.gamma_up)?;
    dict.set_item("gamma_up_err", series.gamma_up_err)?;
    dict.set_item("gamma_down", series.gamma_down)?;
    dict.set_item("gamma_down_err", series.gamma_down_err)?;
    dict.set_item("gamma_1", series.gamma_1)?;
    dict.set_item("p_eq", series.p_eq)?;
    Ok(dict)
}

/// Internal energy of a d-fold degenerate two-level system, in units of the
/// splitting.
#[pyfunction]
fn internal_energy(d: u32, beta_eps: f64) -> PyResult<f64> {
    core_thermo::internal_energy(d, beta_eps).map_err(err)
}

/// (s_rev, s_irr, s) in units of k_B.
#[pyfunction]
fn entropy_split(d: u32, beta_eps: f64) -> PyResult<(f64, f64, f64)> {
    let split = core_thermo::entropy_split(d, beta_eps).map_err(err)?;
    Ok((split.s_rev, split.s_irr, split.s))
}

#[pyfunction]
fn measurement_entropy_reduction(d: u32, beta_eps: f64) -> PyResult<f64> {
    core_thermo::measurement_entropy_reduction(d, beta_eps).map_err(err)
}

#[pyfunction]
fn cop(t_apparatus: f64, t_reservoir: f64, irr_rev_ratio: f64) -> PyResult<f64> {
    core_thermo::cop(t_apparatus, t_reservoir, irr_rev_ratio).map_err(err)
}

/// Bookkeeping of one measurement-reset cycle (energies in k_B T_R).
#[pyfunction]
fn cycle_summary<'py>(
    py: Python<'py>,
    params: &SystemParams,
    t_apparatus: f64,
    t_reservoir: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cycle =
        core_thermo::cycle_summary(&params.inner, t_apparatus, t_reservoir).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("beta_eps", cycle.beta_eps)?;
    dict.set_item("delta_u", cycle.delta_u)?;
    dict.set_item("delta_s", cycle.delta_s)?;
    dict.set_item("w_m", cycle.w_m)?;
    dict.set_item("w_q", cycle.w_q)?;
    dict.set_item("dq_r", cycle.dq_r)?;
    dict.set_item("cop", cycle.cop)?;
    dict.set_item("carnot_cop", cycle.carnot_cop)?;
    Ok(dict)
}

/// (E_J_eff, phase_offset) of the combined SQUID branches.
#[pyfunction]
fn effective_junction(ej1: f64, ej2: f64, phi_s: f64) -> PyResult<(f64, f64)> {
    szilard_core::device::effective_junction(ej1, ej2, phi_s).map_err(err)
}

/// (phi_s, phi_l, phi_l + phi_s) in units of 2 pi.
#[pyfunction]
fn flux_partition(v_ratio: f64, phi_ext: f64) -> PyResult<(f64, f64, f64)> {
    szilard_core::device::flux_partition(v_ratio, phi_ext).map_err(err)
}

/// Whether V = (2k - 1)/(2m) is satisfiable within the search bound, plus
/// the (m, k) witness.
#[pyfunction]
#[pyo3(signature = (v_ratio, bound=1000))]
fn interference_condition(v_ratio: f64, bound: i64) -> PyResult<(bool, Option<(i64, i64)>)> {
    let (ok, witness) =
        szilard_core::device::interference_condition(v_ratio, bound).map_err(err)?;
    Ok((ok, witness.map(|w| (w.m, w.k))))
}

#[pymodule]
fn szilard_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SystemParams>()?;
    m.add_class::<Experiment>()?;
    m.add_class::<ReadoutModel>()?;
    m.add_function(wrap_pyfunction!(coupling_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(total_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(derive_g_delta, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_population, m)?)?;
    m.add_function(wrap_pyfunction!(population_to_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(multilevel_thermal, m)?)?;
    m.add_function(wrap_pyfunction!(run_deterministic, m)?)?;
    m.add_function(wrap_pyfunction!(heat_extraction_curve, m)?)?;
    m.add_function(wrap_pyfunction!(run_population_series, m)?)?;
    m.add_function(wrap_pyfunction!(run_rate_series, m)?)?;
    m.add_function(wrap_pyfunction!(internal_energy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_split, m)?)?;
    m.add_function(wrap_pyfunction!(measurement_entropy_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(cop, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_summary, m)?)?;
    m.add_function(wrap_pyfunction!(effective_junction, m)?)?;
    m.add_function(wrap_pyfunction!(flux_partition, m)?)?;
    m.add_function(wrap_pyfunction!(interference_condition, m)?)?;
    m.add("H_OVER_KB", szilard_core::constants::H_OVER_KB)?;
    Ok(())
}
