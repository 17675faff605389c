//! Multi-run experiments, summary statistics and report files.

mod config;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbbat::{self, IterationRecord, OptimizerConfig, OptimizerError, Variant, VelocitySign};
use crate::netmodel::{embedded_case, parse_case, CaseError, EmbeddedCase, NetworkCase};
use crate::orpd::{
    evaluate_controls, objective_lindex, objective_ploss, objective_tvd, ControlSpace, ControlVector, Evaluator,
    FitnessBreakdown, ObjectiveKind, OrpdError, PenaltyConfig,
};
use crate::powerflow::{solve_power_flow, PowerFlowError};

pub use config::{parse_config, ConfigError};
pub use report::{control_table, emit_reports, SUMMARY_HEADER};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Case { path: String, source: CaseError },
    #[error("{0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Orpd(#[from] OrpdError),
    #[error("base case: {0}")]
    BaseCase(PowerFlowError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{what} requires a positive base value, got {base}")]
    NonPositiveBase { what: &'static str, base: f64 },
}

impl BenchError {
    pub(crate) fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }
}

/// Where a network comes from: one of the built-in cases or a case file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseSource {
    Embedded(EmbeddedCase),
    File(PathBuf),
}

impl CaseSource {
    pub fn load(&self) -> Result<NetworkCase, BenchError> {
        match self {
            CaseSource::Embedded(which) => Ok(embedded_case(*which)),
            CaseSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
                parse_case(&text).map_err(|source| BenchError::Case {
                    path: path.display().to_string(),
                    source,
                })
            }
        }
    }

    /// 100, 200 and 300 iterations for the 14-, 57- and 118-bus cases; 100 for files.
    pub fn default_iterations(&self) -> usize {
        match self {
            CaseSource::Embedded(EmbeddedCase::Ieee57) => 200,
            CaseSource::Embedded(EmbeddedCase::Ieee118) => 300,
            _ => 100,
        }
    }
}

impl fmt::Display for CaseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseSource::Embedded(which) => f.write_str(which.name()),
            CaseSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

impl FromStr for CaseSource {
    type Err = std::convert::Infallible;

    /// Built-in names win; anything else is taken as a path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<EmbeddedCase>() {
            Ok(which) => CaseSource::Embedded(which),
            Err(_) => CaseSource::File(PathBuf::from(s)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StdKind {
    /// Divisor `n`.
    #[default]
    Population,
    /// Divisor `n - 1`.
    Sample,
}

impl FromStr for StdKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "population" => Ok(StdKind::Population),
            "sample" => Ok(StdKind::Sample),
            _ => Err(BenchError::InvalidSpec(format!(
                "unknown std kind '{s}' (expected population or sample)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub case: CaseSource,
    pub objective: ObjectiveKind,
    pub variant: Variant,
    pub runs: usize,
    pub population: usize,
    pub iterations: usize,
    pub penalty: PenaltyConfig,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub pulse_time_dependent: bool,
    pub velocity_sign: VelocitySign,
    pub std_kind: StdKind,
    /// Threads used for independent runs; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(case: CaseSource, objective: ObjectiveKind, variant: Variant) -> Self {
        Self {
            iterations: case.default_iterations(),
            case,
            objective,
            variant,
            runs: 10,
            population: 120,
            penalty: PenaltyConfig::default(),
            master_seed: 0,
            output_dir: PathBuf::from("orpd-out"),
            pulse_time_dependent: false,
            velocity_sign: VelocitySign::Paper,
            std_kind: StdKind::Population,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs < 1 {
            return Err(BenchError::InvalidSpec("runs must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(BenchError::InvalidSpec("workers must be at least 1".into()));
        }
        self.penalty.validate()?;
        self.optimizer_config(0).validate()?;
        Ok(())
    }

    /// Optimizer settings of run `run_index`; runs differ only in their stream.
    pub fn optimizer_config(&self, run_index: usize) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::new(self.variant, self.population, self.iterations)
            .with_seed(self.master_seed)
            .with_stream(run_index as u64);
        cfg.pulse_time_dependent = self.pulse_time_dependent;
        cfg.velocity_sign = self.velocity_sign;
        cfg
    }
}

/// Loss, voltage deviation and L-index of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingMetrics {
    pub p_loss: f64,
    pub q_loss: f64,
    pub tvd: f64,
    pub lindex: f64,
}

impl OperatingMetrics {
    pub fn of(case: &NetworkCase, controls: &ControlVector) -> Result<Self, BenchError> {
        let sol = solve_power_flow(case, controls).map_err(BenchError::BaseCase)?;
        Ok(Self {
            p_loss: objective_ploss(case, &sol),
            q_loss: sol.q_loss,
            tvd: objective_tvd(case, &sol),
            lindex: objective_lindex(case, &sol)?,
        })
    }

    pub fn get(&self, kind: ObjectiveKind) -> f64 {
        match kind {
            ObjectiveKind::ActiveLoss => self.p_loss,
            ObjectiveKind::TotalVoltageDeviation => self.tvd,
            ObjectiveKind::VoltageStabilityIndex => self.lindex,
        }
    }
}

/// Operating point of a case at the controls stored in its file.
pub fn baseline(case: &NetworkCase) -> Result<OperatingMetrics, BenchError> {
    OperatingMetrics::of(case, &ControlVector::base(case))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: usize,
    /// Penalised fitness of the best point found.
    pub best_fitness: f64,
    /// Unpenalised objective at that point; the run statistics use this value.
    pub best_objective: f64,
    pub best_position: Vec<f64>,
    pub breakdown: FitnessBreakdown,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    pub std: f64,
}

/// Best (minimum), worst, mean and standard deviation of `values`.
pub fn summarize(values: &[f64], kind: StdKind) -> Summary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let divisor = match kind {
        StdKind::Population => n,
        StdKind::Sample => (n - 1.0).max(1.0),
    };
    Summary {
        best: values.iter().copied().fold(f64::INFINITY, f64::min),
        worst: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std: (ss / divisor).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub case_name: String,
    pub objective: ObjectiveKind,
    pub labels: Vec<String>,
    pub base: OperatingMetrics,
    pub base_controls: ControlVector,
    pub runs: Vec<RunOutcome>,
    /// Metrics of the overall best point; `None` if its power flow fails.
    pub best_metrics: Option<OperatingMetrics>,
    pub summary: Summary,
    /// Only for the loss objective.
    pub psave_percent: Option<f64>,
    /// Only for the voltage-deviation objective.
    pub tvd_improve_percent: Option<f64>,
}

impl RunReport {
    pub fn best_run(&self) -> &RunOutcome {
        self.runs
            .iter()
            .min_by(|a, b| a.best_objective.total_cmp(&b.best_objective))
            .expect("at least one run")
    }

    pub fn objective_values(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_objective).collect()
    }
}

/// `100 (base - best) / base`.
pub fn compute_psave(base_loss: f64, best_loss: f64) -> Result<f64, BenchError> {
    relative_gain("loss saving", base_loss, best_loss)
}

/// `100 (base - best) / base`.
pub fn compute_tvd_improvement(base_tvd: f64, best_tvd: f64) -> Result<f64, BenchError> {
    relative_gain("voltage deviation improvement", base_tvd, best_tvd)
}

fn relative_gain(what: &'static str, base: f64, best: f64) -> Result<f64, BenchError> {
    if base.is_nan() || base <= 0.0 {
        return Err(BenchError::NonPositiveBase { what, base });
    }
    Ok(100.0 * (base - best) / base)
}

fn single_run(
    evaluator: &Evaluator<'_>,
    spec: &ExperimentSpec,
    run_index: usize,
    parallel: bool,
) -> Result<RunOutcome, BenchError> {
    let cfg = spec.optimizer_config(run_index).with_parallel(parallel);
    let result = bbbat::run(|x| evaluator.fitness(x), evaluator.bounds(), &cfg)?;
    let controls = evaluator.space().clamp(&result.best_position)?;
    let breakdown = evaluate_controls(evaluator.case(), controls, spec.objective, &spec.penalty);
    log::info!(
        "run {run_index}: fitness {:.6}, objective {:.6}",
        result.best_fitness,
        breakdown.objective_value
    );
    Ok(RunOutcome {
        run_index,
        best_fitness: result.best_fitness,
        best_objective: breakdown.objective_value,
        best_position: result.best_position,
        breakdown,
        records: result.records,
    })
}

/// Runs every optimizer run of `spec` on `case` without touching the file system.
pub fn run_campaign(case: &NetworkCase, spec: &ExperimentSpec) -> Result<RunReport, BenchError> {
    spec.validate()?;
    let evaluator = Evaluator::new(case, spec.objective, spec.penalty);
    let base_controls = ControlVector::base(case);
    let base = OperatingMetrics::of(case, &base_controls)?;

    let inner_parallel = spec.runs == 1;
    let job = || -> Result<Vec<RunOutcome>, BenchError> {
        (0..spec.runs)
            .into_par_iter()
            .map(|k| single_run(&evaluator, spec, k, inner_parallel))
            .collect()
    };
    let runs = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::InvalidSpec(e.to_string()))?
            .install(job)?,
        None => job()?,
    };

    let values: Vec<f64> = runs.iter().map(|r| r.best_objective).collect();
    let summary = summarize(&values, spec.std_kind);
    let psave_percent = match spec.objective {
        ObjectiveKind::ActiveLoss => Some(compute_psave(base.p_loss, summary.best)?),
        _ => None,
    };
    let tvd_improve_percent = match spec.objective {
        ObjectiveKind::TotalVoltageDeviation => Some(compute_tvd_improvement(base.tvd, summary.best)?),
        _ => None,
    };
    let best_metrics = runs
        .iter()
        .min_by(|a, b| a.best_objective.total_cmp(&b.best_objective))
        .and_then(|r| OperatingMetrics::of(case, &r.breakdown.controls).ok());
    Ok(RunReport {
        algorithm: spec.variant.label().to_string(),
        case_name: case.name().to_string(),
        objective: spec.objective,
        labels: ControlSpace::new(case).labels().to_vec(),
        base,
        base_controls,
        runs,
        best_metrics,
        summary,
        psave_percent,
        tvd_improve_percent,
    })
}

/// Loads the case, runs the campaign and writes all report files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport, BenchError> {
    let case = spec.case.load()?;
    let report = run_campaign(&case, spec)?;
    emit_reports(&report, spec)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_gains() {
        assert!((compute_psave(13.49, 12.2864).unwrap() - 8.922).abs() < 5e-4);
        assert!((compute_psave(28.462, 21.9499).unwrap() - 22.880).abs() < 5e-4);
        assert_eq!(compute_psave(5.0, 5.0).unwrap(), 0.0);
        assert_eq!(compute_tvd_improvement(1.0, 0.25).unwrap(), 75.0);
        assert!(compute_psave(0.0, 1.0).is_err());
        assert!(compute_tvd_improvement(-1.0, 1.0).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0], StdKind::Population);
        assert_eq!((s.best, s.worst, s.mean), (1.0, 4.0, 2.5));
        assert!((s.std - 1.25f64.sqrt()).abs() < 1e-15);
        let s = summarize(&[1.0, 2.0, 3.0, 4.0], StdKind::Sample);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let s = summarize(&[7.0], StdKind::Sample);
        assert_eq!((s.best, s.worst, s.mean, s.std), (7.0, 7.0, 7.0, 0.0));
    }

    #[test]
    fn iteration_budget_follows_case() {
        let spec = |c: &str| ExperimentSpec::new(c.parse().unwrap(), ObjectiveKind::ActiveLoss, Variant::Degbbba);
        assert_eq!(spec("ieee14").iterations, 100);
        assert_eq!(spec("ieee57").iterations, 200);
        assert_eq!(spec("ieee118").iterations, 300);
        assert_eq!(spec("grid.m").iterations, 100);
    }

    #[test]
    fn case_source_parsing() {
        assert_eq!(
            "ieee57".parse::<CaseSource>().unwrap(),
            CaseSource::Embedded(EmbeddedCase::Ieee57)
        );
        assert_eq!(
            "nets/my.m".parse::<CaseSource>().unwrap(),
            CaseSource::File(PathBuf::from("nets/my.m"))
        );
    }
}
