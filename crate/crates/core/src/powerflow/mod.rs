//! AC power flow: admittance assembly and a polar Newton-Raphson solver.

mod flows;
mod newton;
mod ybus;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{BusKind, NetworkCase};
use crate::orpd::ControlVector;

pub use flows::{branch_apparent_flows, branch_powers, loss_from_branch_conductance};
pub use newton::NewtonSystem;
pub(crate) use ybus::{assemble, branch_ratios, bus_shunts};
pub use ybus::{branch_admittance, build_ybus, BranchAdmittance, YbusMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerFlowError {
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("power flow did not converge in {iterations} iterations (max mismatch {max_mismatch:.3e} p.u.)")]
    NonConvergence {
        iterations: usize,
        max_mismatch: f64,
        best_effort: Box<PowerFlowSolution>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlowOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50,
        }
    }
}

/// Complex power entering a branch at each terminal, MVA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPower {
    pub s_from: Complex64,
    pub s_to: Complex64,
}

impl BranchPower {
    /// Largest terminal apparent power, the quantity checked against `s_max`.
    pub fn loading(&self) -> f64 {
        self.s_from.norm().max(self.s_to.norm())
    }
}

/// Operating point produced by [`solve_power_flow`].
///
/// Voltages are indexed like `case.buses()`, `q_gen` like `case.generators()`
/// and the branch vectors like `case.branches()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowSolution {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub q_gen: Vec<f64>,
    pub p_slack: f64,
    pub branch_flow_from: Vec<f64>,
    pub branch_flow_to: Vec<f64>,
    pub branch_power: Vec<BranchPower>,
    pub p_loss: f64,
    pub q_loss: f64,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
    /// Turns ratio of every branch used for this solve.
    pub branch_ratio: Vec<f64>,
    /// Compensator injections at nominal voltage, MVAr.
    pub shunt_q_mvar: Vec<f64>,
}

impl PowerFlowSolution {
    pub fn phasor(&self, bus_index: usize) -> Complex64 {
        Complex64::from_polar(self.v[bus_index], self.theta[bus_index])
    }

    pub fn phasors(&self) -> Vec<Complex64> {
        (0..self.v.len()).map(|i| self.phasor(i)).collect()
    }
}

pub fn solve_power_flow(case: &NetworkCase, controls: &ControlVector) -> Result<PowerFlowSolution, PowerFlowError> {
    solve_power_flow_with(case, controls, &PowerFlowOptions::default())
}

pub fn solve_power_flow_with(
    case: &NetworkCase,
    controls: &ControlVector,
    options: &PowerFlowOptions,
) -> Result<PowerFlowSolution, PowerFlowError> {
    if controls.v_gen.len() != case.n_generators() {
        return Err(PowerFlowError::DimensionMismatch {
            what: "generator voltages",
            expected: case.n_generators(),
            got: controls.v_gen.len(),
        });
    }
    let base = case.base_mva();
    let shunt_q_mvar: Vec<f64> = controls.q_shunt.iter().map(|q| q * base).collect();
    let ratios = branch_ratios(case, &controls.taps)?;
    let ysh = bus_shunts(case, &shunt_q_mvar)?;
    let ybus = assemble(case, &ratios, &ysh);

    let mut vm: Vec<f64> = case.buses().iter().map(|b| b.v_init).collect();
    let mut va = vec![0.0; case.n_buses()];
    for (g, &v) in case.generators().iter().zip(&controls.v_gen) {
        vm[case.bus_index(g.bus).expect("validated")] = v;
    }

    let system = NewtonSystem::new(case, ybus.into_matrix());
    let outcome = newton::iterate(&system, &mut vm, &mut va, options.tolerance, options.max_iterations);
    let (converged, iterations, max_mismatch) = match outcome {
        newton::NewtonOutcome::Converged {
            iterations,
            max_mismatch,
        } => (true, iterations, max_mismatch),
        newton::NewtonOutcome::NotConverged {
            iterations,
            max_mismatch,
        } => (false, iterations, max_mismatch),
        newton::NewtonOutcome::Singular { iteration } => {
            return Err(PowerFlowError::SingularJacobian { iteration });
        }
    };

    let solution = finish(
        case,
        &system,
        vm,
        va,
        ratios,
        shunt_q_mvar,
        converged,
        iterations,
        max_mismatch,
    );
    if converged {
        Ok(solution)
    } else {
        Err(PowerFlowError::NonConvergence {
            iterations,
            max_mismatch,
            best_effort: Box::new(solution),
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    case: &NetworkCase,
    system: &NewtonSystem,
    v: Vec<f64>,
    theta: Vec<f64>,
    branch_ratio: Vec<f64>,
    shunt_q_mvar: Vec<f64>,
    converged: bool,
    iterations: usize,
    max_mismatch: f64,
) -> PowerFlowSolution {
    let base = case.base_mva();
    let s_inj = system.injections(&v, &theta);
    let buses = case.buses();

    let q_gen = case
        .generators()
        .iter()
        .map(|g| {
            let i = case.bus_index(g.bus).expect("validated");
            s_inj[i].im * base + buses[i].q_demand
        })
        .collect();
    let slack = case.slack_index();
    let p_slack = s_inj[slack].re * base + buses[slack].p_demand;
    let p_gen: f64 = case
        .generators()
        .iter()
        .map(|g| {
            if buses[case.bus_index(g.bus).expect("validated")].kind == BusKind::Slack {
                p_slack
            } else {
                g.p_set
            }
        })
        .sum();
    let p_demand: f64 = buses.iter().map(|b| b.p_demand).sum();

    let mut solution = PowerFlowSolution {
        v,
        theta,
        q_gen,
        p_slack,
        branch_flow_from: Vec::new(),
        branch_flow_to: Vec::new(),
        branch_power: Vec::new(),
        p_loss: p_gen - p_demand,
        q_loss: 0.0,
        converged,
        iterations,
        max_mismatch,
        branch_ratio,
        shunt_q_mvar,
    };
    let powers = branch_powers(case, &solution);
    solution.branch_flow_from = powers.iter().map(|p| p.s_from.norm()).collect();
    solution.branch_flow_to = powers.iter().map(|p| p.s_to.norm()).collect();
    solution.q_loss = flows::series_reactive_loss(case, &solution);
    solution.branch_power = powers;
    solution
}
