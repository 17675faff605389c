//! Python bindings: `import orpd_py`.

use std::path::PathBuf;

use orpd_core::bbbat::{self, OptimizerConfig, Variant};
use orpd_core::bench::{self, CaseSource, ExperimentSpec};
use orpd_core::netmodel::{self, NetworkCase};
use orpd_core::orpd::{ControlSpace, ControlVector, Evaluator, ObjectiveKind, PenaltyConfig};
use orpd_core::powerflow;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bench_err(e: bench::BenchError) -> PyErr {
    match e {
        bench::BenchError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

/// A validated network.
#[pyclass(name = "Case", frozen)]
struct PyCase {
    inner: NetworkCase,
}

#[pymethods]
impl PyCase {
    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn base_mva(&self) -> f64 {
        self.inner.base_mva()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.control_dimension()
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.summary();
        let d = PyDict::new(py);
        d.set_item("name", s.name)?;
        d.set_item("base_mva", s.base_mva)?;
        d.set_item("n_buses", s.n_buses)?;
        d.set_item("n_generators", s.n_generators)?;
        d.set_item("n_pq", s.n_pq)?;
        d.set_item("n_branches", s.n_branches)?;
        d.set_item("n_transformers", s.n_transformers)?;
        d.set_item("n_shunts", s.n_shunts)?;
        d.set_item("total_p_demand", s.total_p_demand)?;
        d.set_item("total_q_demand", s.total_q_demand)?;
        d.set_item("dimension", s.dimension)?;
        Ok(d)
    }

    /// Control labels such as `V_G1`, `T_4-7`, `Q_C9`.
    fn labels(&self) -> Vec<String> {
        ControlSpace::new(&self.inner).labels().to_vec()
    }

    /// `(lower, upper)` control bounds.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let space = ControlSpace::new(&self.inner);
        (space.bounds().lower().to_vec(), space.bounds().upper().to_vec())
    }

    fn base_controls(&self) -> Vec<f64> {
        ControlVector::base(&self.inner).to_flat()
    }

    /// MATPOWER text of this case.
    fn to_matpower(&self) -> String {
        netmodel::write_case(&self.inner)
    }

    /// Solves the power flow at `controls` (flat vector, default: base case).
    #[pyo3(signature = (controls=None))]
    fn power_flow<'py>(&self, py: Python<'py>, controls: Option<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
        let cv = match controls {
            Some(x) => ControlVector::from_flat(&self.inner, &x).map_err(value_err)?,
            None => ControlVector::base(&self.inner),
        };
        let sol = powerflow::solve_power_flow(&self.inner, &cv).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("v", sol.v.clone())?;
        d.set_item("theta", sol.theta.clone())?;
        d.set_item("q_gen", sol.q_gen.clone())?;
        d.set_item("p_slack", sol.p_slack)?;
        d.set_item("p_loss", sol.p_loss)?;
        d.set_item("q_loss", sol.q_loss)?;
        d.set_item("iterations", sol.iterations)?;
        d.set_item("tvd", orpd_core::orpd::objective_tvd(&self.inner, &sol))?;
        d.set_item(
            "lindex",
            orpd_core::orpd::objective_lindex(&self.inner, &sol).map_err(value_err)?,
        )?;
        Ok(d)
    }

    /// Penalised fitness breakdown of a raw (unclamped) control vector.
    #[pyo3(signature = (x, objective="ploss", lambda_v=100.0, lambda_q=100.0, lambda_s=100.0))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        x: Vec<f64>,
        objective: &str,
        lambda_v: f64,
        lambda_q: f64,
        lambda_s: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let kind: ObjectiveKind = objective.parse().map_err(value_err)?;
        let penalty = PenaltyConfig {
            lambda_v,
            lambda_q,
            lambda_s,
        };
        penalty.validate().map_err(value_err)?;
        let b = Evaluator::new(&self.inner, kind, penalty)
            .evaluate(&x)
            .map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("objective", b.objective_value)?;
        d.set_item("penalty_v", b.penalty_v)?;
        d.set_item("penalty_q", b.penalty_q)?;
        d.set_item("penalty_s", b.penalty_s)?;
        d.set_item("total", b.total)?;
        d.set_item("feasible", b.feasible)?;
        d.set_item("controls", b.controls.to_flat())?;
        Ok(d)
    }

    /// One optimizer run; returns the best point and the convergence trace.
    #[pyo3(signature = (objective="ploss", algo="degbbba", pop=120, iters=100, seed=0, stream=0))]
    #[allow(clippy::too_many_arguments)]
    fn optimize<'py>(
        &self,
        py: Python<'py>,
        objective: &str,
        algo: &str,
        pop: usize,
        iters: usize,
        seed: u64,
        stream: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let kind: ObjectiveKind = objective.parse().map_err(value_err)?;
        let variant: Variant = algo.parse().map_err(value_err)?;
        let evaluator = Evaluator::new(&self.inner, kind, PenaltyConfig::default());
        let cfg = OptimizerConfig::new(variant, pop, iters)
            .with_seed(seed)
            .with_stream(stream)
            .with_parallel(true);
        let result = py
            .detach(|| bbbat::run(|x| evaluator.fitness(x), evaluator.bounds(), &cfg))
            .map_err(value_err)?;
        let best = evaluator.evaluate(&result.best_position).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("best_fitness", result.best_fitness)?;
        d.set_item("best_objective", best.objective_value)?;
        d.set_item("feasible", best.feasible)?;
        d.set_item("best_position", best.controls.to_flat())?;
        d.set_item(
            "trace",
            result.records.iter().map(|r| r.best_fitness).collect::<Vec<f64>>(),
        )?;
        Ok(d)
    }
}

/// Loads `ieee14`, `ieee57`, `ieee118` or a MATPOWER case file.
#[pyfunction]
fn load_case(name: &str) -> PyResult<PyCase> {
    let source: CaseSource = name.parse().expect("infallible");
    Ok(PyCase {
        inner: source.load().map_err(bench_err)?,
    })
}

/// Parses MATPOWER case text.
#[pyfunction]
fn parse_case(text: &str) -> PyResult<PyCase> {
    Ok(PyCase {
        inner: netmodel::parse_case(text).map_err(value_err)?,
    })
}

#[pyfunction]
fn lambda_schedule(t: usize, max_iterations: usize) -> f64 {
    bbbat::lambda_schedule(t, max_iterations)
}

#[pyfunction]
fn compute_psave(base_loss: f64, best_loss: f64) -> PyResult<f64> {
    bench::compute_psave(base_loss, best_loss).map_err(value_err)
}

/// Runs a campaign, writes its reports to `out` and returns the summary row.
/// `iters` defaults to the case's budget (100, 200 or 300).
#[pyfunction]
#[pyo3(signature = (case, out, objective="ploss", algo="degbbba", runs=10, pop=120, iters=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    case: &str,
    out: PathBuf,
    objective: &str,
    algo: &str,
    runs: usize,
    pop: usize,
    iters: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = ExperimentSpec::new(
        case.parse().expect("infallible"),
        objective.parse().map_err(value_err)?,
        algo.parse().map_err(value_err)?,
    );
    spec.runs = runs;
    spec.population = pop;
    if let Some(iters) = iters {
        spec.iterations = iters;
    }
    spec.master_seed = seed;
    spec.output_dir = out;
    let report = py.detach(|| bench::run_experiment(&spec)).map_err(bench_err)?;
    let d = PyDict::new(py);
    d.set_item("algorithm", report.algorithm.clone())?;
    d.set_item("case", report.case_name.clone())?;
    d.set_item("objective", report.objective.key())?;
    d.set_item("best", report.summary.best)?;
    d.set_item("worst", report.summary.worst)?;
    d.set_item("mean", report.summary.mean)?;
    d.set_item("std", report.summary.std)?;
    d.set_item("psave_pct", report.psave_percent)?;
    d.set_item("base_loss", report.base.p_loss)?;
    Ok(d)
}

#[pymodule]
fn orpd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCase>()?;
    m.add_function(wrap_pyfunction!(load_case, m)?)?;
    m.add_function(wrap_pyfunction!(parse_case, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(compute_psave, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
