//! Python bindings for the `glassbench` core: disorder samples, spin
//! configurations, single trajectories, schedules, exact enumeration, and
//! the batch experiment runner.
//!
//! Algorithm variants, regimes, record modes, and stream roles cross the
//! boundary as strings ("alg2", "two_sided", "full", "disorder", ...), and
//! batch results come back as plain dicts, so the module needs no Python
//! support code.

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use glassbench_core as core;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(s: &str) -> PyResult<core::Variant> {
    core::Variant::from_str(s).map_err(err)
}

fn parse_record_mode(s: &str) -> PyResult<core::RecordMode> {
    match s {
        "summary" => Ok(core::RecordMode::Summary),
        "minima_only" => Ok(core::RecordMode::MinimaOnly),
        "full" => Ok(core::RecordMode::Full),
        other => Err(PyValueError::new_err(format!(
            "unknown record mode `{other}` (expected summary, minima_only or full)"
        ))),
    }
}

fn build_params(
    variant: &str,
    lambda1_0: f64,
    k: f64,
    m: f64,
    epsilon: f64,
    max_steps: u64,
    record: &str,
) -> PyResult<core::TrajectoryParams> {
    let p = core::TrajectoryParams::new(parse_variant(variant)?, lambda1_0, k)
        .with_m(m)
        .with_epsilon(epsilon)
        .with_max_steps(max_steps)
        .with_record_mode(parse_record_mode(record)?);
    p.validate().map_err(err)?;
    Ok(p)
}

/// Frozen symmetric Gaussian couplings for one disorder realization.
#[pyclass(module = "glassbench")]
struct CouplingMatrix {
    inner: core::CouplingMatrix,
}

#[pymethods]
impl CouplingMatrix {
    /// Draws the couplings for an `n`-spin system from the given seed.
    #[staticmethod]
    #[pyo3(signature = (n, seed=0))]
    fn generate(n: usize, seed: u64) -> PyResult<Self> {
        Ok(CouplingMatrix {
            inner: core::CouplingMatrix::generate(n, seed).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!(
                "index ({i}, {j}) out of range for n={n}"
            )));
        }
        Ok(self.inner.get(i, j))
    }

    fn __repr__(&self) -> String {
        format!(
            "CouplingMatrix(n={}, seed={})",
            self.inner.n(),
            self.inner.seed()
        )
    }
}

/// A vector of N spins, each +1 or -1.
#[pyclass(module = "glassbench")]
struct SpinConfiguration {
    inner: core::SpinConfiguration,
}

#[pymethods]
impl SpinConfiguration {
    #[new]
    fn new(spins: Vec<i8>) -> PyResult<Self> {
        Ok(SpinConfiguration {
            inner: core::SpinConfiguration::from_spins(spins).map_err(err)?,
        })
    }

    /// A uniformly random configuration drawn from the given seed.
    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        let mut stream = core::Stream::from_seed(seed);
        Ok(SpinConfiguration {
            inner: core::SpinConfiguration::random(n, &mut stream).map_err(err)?,
        })
    }

    #[getter]
    fn spins(&self) -> Vec<i8> {
        self.inner.spins().to_vec()
    }

    fn flip(&mut self, i: usize) -> PyResult<()> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "site {i} out of range for n={}",
                self.inner.len()
            )));
        }
        self.inner.flip(i);
        Ok(())
    }

    fn energy(&self, j: &CouplingMatrix) -> PyResult<f64> {
        core::hamiltonian(&j.inner, &self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("SpinConfiguration({:?})", self.inner.spins())
    }
}

/// The outcome of one run: termination cause, flip count, energy summary,
/// visited minima, and (in full record mode) the per-step history.
#[pyclass(module = "glassbench")]
struct Trajectory {
    inner: core::Trajectory,
}

#[pymethods]
impl Trajectory {
    #[getter]
    fn termination(&self) -> String {
        self.inner.termination.to_string()
    }

    #[getter]
    fn flips(&self) -> u64 {
        self.inner.flips
    }

    #[getter]
    fn final_energy(&self) -> f64 {
        self.inner.final_energy
    }

    #[getter]
    fn best_minimum_energy(&self) -> Option<f64> {
        self.inner.best_minimum_energy
    }

    /// `(step, energy)` for each distinct one-flip-stable configuration hit.
    #[getter]
    fn visited_minima(&self) -> Vec<(u64, f64)> {
        self.inner.visited_minima.clone()
    }

    #[getter]
    fn final_spins(&self) -> Vec<i8> {
        self.inner.final_config.spins().to_vec()
    }

    /// Per-step records as dicts; empty unless the run recorded in full.
    fn steps<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let out = PyList::empty(py);
        for s in &self.inner.steps {
            let d = PyDict::new(py);
            d.set_item("t", s.t)?;
            d.set_item("site", s.site)?;
            d.set_item("draw", s.draw)?;
            d.set_item("delta", s.delta)?;
            d.set_item("energy", s.energy)?;
            d.set_item("regime", s.regime.to_string())?;
            out.append(d)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(flips={}, termination='{}', final_energy={})",
            self.inner.flips, self.inner.termination, self.inner.final_energy
        )
    }
}

/// Draw-density schedule, advanced once per accepted flip.
#[pyclass(module = "glassbench")]
struct ScheduleState {
    inner: core::ScheduleState,
}

#[pymethods]
impl ScheduleState {
    #[new]
    #[pyo3(signature = (variant, lambda1_0, k, m=1000.0))]
    fn new(variant: &str, lambda1_0: f64, k: f64, m: f64) -> PyResult<Self> {
        Ok(ScheduleState {
            inner: core::ScheduleState::init(parse_variant(variant)?, lambda1_0, k, m)
                .map_err(err)?,
        })
    }

    /// The schedule as it stands after `t` accepted flips.
    #[staticmethod]
    #[pyo3(signature = (variant, lambda1_0, k, t, m=1000.0))]
    fn at_step(variant: &str, lambda1_0: f64, k: f64, t: u64, m: f64) -> PyResult<Self> {
        Ok(ScheduleState {
            inner: core::ScheduleState::at_step(parse_variant(variant)?, lambda1_0, k, m, t)
                .map_err(err)?,
        })
    }

    fn advance(&mut self) {
        self.inner.advance();
    }

    #[getter]
    fn t(&self) -> u64 {
        self.inner.t()
    }

    #[getter]
    fn regime(&self) -> String {
        self.inner.regime().to_string()
    }

    #[getter]
    fn switched_at(&self) -> Option<u64> {
        self.inner.switched_at()
    }

    #[getter]
    fn frozen_rate(&self) -> Option<f64> {
        self.inner.frozen_rate()
    }

    #[getter]
    fn lambda_pos(&self) -> Option<f64> {
        self.inner.lambda_pos()
    }

    /// Probability density of the next draw at `x`.
    fn density_value(&self, x: f64) -> f64 {
        self.inner.density().value(x)
    }

    /// `P(D >= x)` of the next draw, for strictly positive `x`.
    fn tail_probability(&self, x: f64) -> PyResult<f64> {
        self.inner.density().tail_probability(x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ScheduleState(t={}, regime='{}')",
            self.inner.t(),
            self.inner.regime()
        )
    }
}

/// Runs one trajectory; the RNG stream is derived from `seed` alone.
#[pyfunction]
#[pyo3(signature = (j, sigma0, variant, lambda1_0, k, m=1000.0, epsilon=1e-4,
                    max_steps=1_000_000, record="summary", seed=0))]
#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    py: Python<'_>,
    j: &CouplingMatrix,
    sigma0: &SpinConfiguration,
    variant: &str,
    lambda1_0: f64,
    k: f64,
    m: f64,
    epsilon: f64,
    max_steps: u64,
    record: &str,
    seed: u64,
) -> PyResult<Trajectory> {
    let params = build_params(variant, lambda1_0, k, m, epsilon, max_steps, record)?;
    let inner = py
        .detach(|| {
            let mut stream = core::Stream::from_seed(seed);
            core::run_trajectory(&j.inner, &sigma0.inner, &params, &mut stream)
        })
        .map_err(err)?;
    Ok(Trajectory { inner })
}

/// Recomputes every recorded step of a full-record trajectory from the
/// couplings and start configuration; returns a dict with `valid`,
/// `first_divergence`, and `detail`.
#[pyfunction]
fn replay_validate<'py>(
    py: Python<'py>,
    j: &CouplingMatrix,
    trajectory: &Trajectory,
    sigma0: &SpinConfiguration,
) -> PyResult<Bound<'py, PyDict>> {
    let report = core::replay_validate(&j.inner, &trajectory.inner, &sigma0.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("valid", report.valid)?;
    d.set_item("first_divergence", report.first_divergence)?;
    d.set_item("detail", report.detail)?;
    Ok(d)
}

/// Exact ground state by exhaustive enumeration; `(spins, energy)`.
#[pyfunction]
fn exact_ground_state(py: Python<'_>, j: &CouplingMatrix) -> PyResult<(Vec<i8>, f64)> {
    let (config, energy) = py.detach(|| core::exact_ground_state(&j.inner)).map_err(err)?;
    Ok((config.spins().to_vec(), energy))
}

/// Census of all one-flip-stable configurations (small systems only);
/// returns a dict with `count`, `ground_energy`, `ground_degeneracy`, and
/// the sorted `energies` list.
#[pyfunction]
fn enumerate_local_minima<'py>(py: Python<'py>, j: &CouplingMatrix) -> PyResult<Bound<'py, PyDict>> {
    let census = py
        .detach(|| core::enumerate_local_minima(&j.inner))
        .map_err(err)?;
    let mut energies: Vec<f64> = census.minima().map(|(_, e)| e).collect();
    energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = PyDict::new(py);
    d.set_item("count", census.count())?;
    d.set_item("ground_energy", census.ground_energy())?;
    d.set_item("ground_degeneracy", census.ground_configs().len())?;
    d.set_item("energies", energies)?;
    Ok(d)
}

/// Derives a child RNG seed for a `(realization, restart)` cell; `role` is
/// "disorder" or "trajectory".
#[pyfunction]
fn derive_seed(master_seed: u64, realization: u64, restart: u64, role: &str) -> PyResult<u64> {
    let role = match role {
        "disorder" => core::StreamRole::Disorder,
        "trajectory" => core::StreamRole::Trajectory,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown stream role `{other}` (expected disorder or trajectory)"
            )))
        }
    };
    Ok(core::derive_seed(master_seed, realization, restart, role))
}

/// Log-log least-squares fit of `tau ~ N^a` through `(n, tau)` points;
/// returns a dict with `exponent`, `intercept`, `r_squared`, `points_used`.
#[pyfunction]
fn fit_exponent<'py>(py: Python<'py>, points: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let fit = core::fit_exponent(&points).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("exponent", fit.exponent)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("r_squared", fit.r_squared)?;
    d.set_item("points_used", fit.points_used)?;
    Ok(d)
}

fn result_row_dict<'py>(py: Python<'py>, r: &core::ResultRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("algorithm", r.algorithm.to_string())?;
    d.set_item("n", r.n)?;
    d.set_item("lambda1_0", r.lambda1_0)?;
    d.set_item("k", r.k)?;
    d.set_item("m", r.m)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("protocol", r.protocol.to_string())?;
    d.set_item("nreal", r.nreal)?;
    d.set_item("restarts", r.restarts)?;
    d.set_item("tau_mean", r.tau_mean)?;
    d.set_item("tau_stderr", r.tau_stderr)?;
    d.set_item("h_n_mean", r.h_n_mean)?;
    d.set_item("h_n_stderr", r.h_n_stderr)?;
    d.set_item("trajectories", r.trajectories)?;
    d.set_item("step_limit_count", r.step_limit_count)?;
    d.set_item("master_seed", r.master_seed)?;
    d.set_item("low_coverage", r.low_coverage)?;
    Ok(d)
}

/// Runs a full experiment grid from a JSON config string; returns a dict
/// with `results` (one dict per grid point) and `fits` (one dict per
/// parameter combination with enough sizes).
#[pyfunction]
#[pyo3(signature = (config_json, workers=None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_json: &str,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg: core::ExperimentConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("invalid config: {e}")))?;
    let cfg = cfg.resolved().map_err(err)?;
    let rows = py
        .detach(|| core::run_experiment(&cfg, workers))
        .map_err(err)?;
    let fits = core::fit_rows(&rows);

    let results = PyList::empty(py);
    for r in &rows {
        results.append(result_row_dict(py, r)?)?;
    }
    let fit_list = PyList::empty(py);
    for f in &fits {
        let d = PyDict::new(py);
        d.set_item("algorithm", f.algorithm.to_string())?;
        d.set_item("lambda1_0", f.lambda1_0)?;
        d.set_item("k", f.k)?;
        d.set_item("exponent", f.fit.exponent)?;
        d.set_item("intercept", f.fit.intercept)?;
        d.set_item("r_squared", f.fit.r_squared)?;
        d.set_item("points_used", f.fit.points_used)?;
        fit_list.append(d)?;
    }
    let out = PyDict::new(py);
    out.set_item("results", results)?;
    out.set_item("fits", fit_list)?;
    Ok(out)
}

#[pymodule]
fn glassbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add("RNG_METHOD_ID", core::RNG_METHOD_ID)?;
    m.add("GAUSSIAN_METHOD_ID", core::GAUSSIAN_METHOD_ID)?;
    m.add_class::<CouplingMatrix>()?;
    m.add_class::<SpinConfiguration>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<ScheduleState>()?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(replay_validate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_local_minima, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
