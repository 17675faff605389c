//! Control encoding, objectives and penalised fitness for reactive power dispatch.

mod controls;
mod objectives;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::Bounds;
use crate::netmodel::NetworkCase;
use crate::powerflow::{solve_power_flow, PowerFlowSolution};

pub use controls::{clamp_controls, ControlSpace, ControlVector};
pub use objectives::{lindex_per_bus, objective_lindex, objective_ploss, objective_tvd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrpdError {
    #[error("expected a control vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("load-bus block of the admittance matrix is singular")]
    SingularPartition,
    #[error("penalty weight {name} must be finite and non-negative, got {value}")]
    InvalidPenalty { name: &'static str, value: f64 },
    #[error("unknown objective '{0}' (expected ploss, tvd or lindex)")]
    UnknownObjective(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    ActiveLoss,
    TotalVoltageDeviation,
    VoltageStabilityIndex,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [
        ObjectiveKind::ActiveLoss,
        ObjectiveKind::TotalVoltageDeviation,
        ObjectiveKind::VoltageStabilityIndex,
    ];

    /// Short name used on the command line and in reports.
    pub fn key(self) -> &'static str {
        match self {
            ObjectiveKind::ActiveLoss => "ploss",
            ObjectiveKind::TotalVoltageDeviation => "tvd",
            ObjectiveKind::VoltageStabilityIndex => "lindex",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            ObjectiveKind::ActiveLoss => "MW",
            ObjectiveKind::TotalVoltageDeviation => "p.u.",
            ObjectiveKind::VoltageStabilityIndex => "",
        }
    }

    pub fn evaluate(self, case: &NetworkCase, solution: &PowerFlowSolution) -> Result<f64, OrpdError> {
        match self {
            ObjectiveKind::ActiveLoss => Ok(objective_ploss(case, solution)),
            ObjectiveKind::TotalVoltageDeviation => Ok(objective_tvd(case, solution)),
            ObjectiveKind::VoltageStabilityIndex => objective_lindex(case, solution),
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ObjectiveKind {
    type Err = OrpdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ploss" | "loss" => Ok(ObjectiveKind::ActiveLoss),
            "tvd" => Ok(ObjectiveKind::TotalVoltageDeviation),
            "lindex" | "l-index" => Ok(ObjectiveKind::VoltageStabilityIndex),
            _ => Err(OrpdError::UnknownObjective(s.to_string())),
        }
    }
}

/// Weights of the squared limit violations added to the objective.
///
/// Violations are measured in p.u. for load-bus voltage, MVAr for generator
/// reactive output and MVA for branch loading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda_v: f64,
    pub lambda_q: f64,
    pub lambda_s: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda_v: 100.0,
            lambda_q: 100.0,
            lambda_s: 100.0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<(), OrpdError> {
        for (name, value) in [
            ("lambda_v", self.lambda_v),
            ("lambda_q", self.lambda_q),
            ("lambda_s", self.lambda_s),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(OrpdError::InvalidPenalty { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyTerms {
    pub v: f64,
    pub q: f64,
    pub s: f64,
}

impl PenaltyTerms {
    pub fn total(&self) -> f64 {
        self.v + self.q + self.s
    }
}

fn excess(x: f64, lo: f64, hi: f64) -> f64 {
    x - x.clamp(lo, hi)
}

pub fn penalty_terms(case: &NetworkCase, solution: &PowerFlowSolution, config: &PenaltyConfig) -> PenaltyTerms {
    let buses = case.buses();
    let v: f64 = case
        .pq_indices()
        .iter()
        .map(|&i| excess(solution.v[i], buses[i].v_min, buses[i].v_max).powi(2))
        .sum();
    let q: f64 = case
        .generators()
        .iter()
        .zip(&solution.q_gen)
        .map(|(g, &qg)| excess(qg, g.q_min, g.q_max).powi(2))
        .sum();
    let s: f64 = case
        .branches()
        .iter()
        .enumerate()
        .filter(|(_, br)| br.s_max > 0.0)
        .map(|(k, br)| {
            let loading = solution.branch_flow_from[k].max(solution.branch_flow_to[k]);
            (loading - loading.min(br.s_max)).powi(2)
        })
        .sum();
    PenaltyTerms {
        v: config.lambda_v * v,
        q: config.lambda_q * q,
        s: config.lambda_s * s,
    }
}

/// Objective, penalties and the power-flow state behind one fitness value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub objective_value: f64,
    pub penalty_v: f64,
    pub penalty_q: f64,
    pub penalty_s: f64,
    pub total: f64,
    pub feasible: bool,
    pub controls: ControlVector,
    /// `None` when the power flow failed; `total` is then `+inf`.
    pub solution: Option<PowerFlowSolution>,
}

impl FitnessBreakdown {
    fn rejected(controls: ControlVector) -> Self {
        Self {
            objective_value: f64::INFINITY,
            penalty_v: 0.0,
            penalty_q: 0.0,
            penalty_s: 0.0,
            total: f64::INFINITY,
            feasible: false,
            controls,
            solution: None,
        }
    }
}

/// Scores a fixed, already-clamped control vector.
pub fn evaluate_controls(
    case: &NetworkCase,
    controls: ControlVector,
    kind: ObjectiveKind,
    config: &PenaltyConfig,
) -> FitnessBreakdown {
    let solution = match solve_power_flow(case, &controls) {
        Ok(s) => s,
        Err(e) => {
            log::debug!("rejecting candidate: {e}");
            return FitnessBreakdown::rejected(controls);
        }
    };
    let objective_value = match kind.evaluate(case, &solution) {
        Ok(v) => v,
        Err(e) => {
            log::debug!("rejecting candidate: {e}");
            return FitnessBreakdown::rejected(controls);
        }
    };
    let p = penalty_terms(case, &solution, config);
    FitnessBreakdown {
        objective_value,
        penalty_v: p.v,
        penalty_q: p.q,
        penalty_s: p.s,
        total: objective_value + p.v + p.q + p.s,
        feasible: p.v == 0.0 && p.q == 0.0 && p.s == 0.0,
        controls,
        solution: Some(solution),
    }
}

/// Clamps `raw` to the case's control bounds, solves the power flow and
/// returns the penalised fitness. Power-flow failures give `total = +inf`.
pub fn evaluate_fitness(
    case: &NetworkCase,
    raw: &[f64],
    kind: ObjectiveKind,
    config: &PenaltyConfig,
) -> Result<FitnessBreakdown, OrpdError> {
    Evaluator::new(case, kind, *config).evaluate(raw)
}

/// A case, objective and penalty setting bundled as a black-box fitness.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    case: &'a NetworkCase,
    kind: ObjectiveKind,
    penalty: PenaltyConfig,
    space: ControlSpace,
}

impl<'a> Evaluator<'a> {
    pub fn new(case: &'a NetworkCase, kind: ObjectiveKind, penalty: PenaltyConfig) -> Self {
        Self {
            case,
            kind,
            penalty,
            space: ControlSpace::new(case),
        }
    }

    pub fn case(&self) -> &NetworkCase {
        self.case
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn penalty(&self) -> &PenaltyConfig {
        &self.penalty
    }

    pub fn space(&self) -> &ControlSpace {
        &self.space
    }

    pub fn bounds(&self) -> &Bounds {
        self.space.bounds()
    }

    pub fn evaluate(&self, raw: &[f64]) -> Result<FitnessBreakdown, OrpdError> {
        let controls = self.space.clamp(raw)?;
        Ok(evaluate_controls(self.case, controls, self.kind, &self.penalty))
    }

    /// Penalised fitness; `+inf` for rejected candidates or a wrong length.
    pub fn fitness(&self, raw: &[f64]) -> f64 {
        self.evaluate(raw).map(|b| b.total).unwrap_or(f64::INFINITY)
    }
}
