use num_complex::Complex64;

use super::{branch_admittance, BranchPower, PowerFlowSolution};
use crate::netmodel::NetworkCase;

fn terminals(case: &NetworkCase, solution: &PowerFlowSolution, k: usize) -> (Complex64, Complex64) {
    let br = &case.branches()[k];
    let f = case.bus_index(br.from_bus).expect("validated");
    let t = case.bus_index(br.to_bus).expect("validated");
    (solution.phasor(f), solution.phasor(t))
}

/// Complex power injected into every branch at both ends, MVA.
pub fn branch_powers(case: &NetworkCase, solution: &PowerFlowSolution) -> Vec<BranchPower> {
    let base = case.base_mva();
    case.branches()
        .iter()
        .enumerate()
        .map(|(k, br)| {
            let (vf, vt) = terminals(case, solution, k);
            let a = branch_admittance(br, solution.branch_ratio[k]);
            let i_from = a.yff * vf + a.yft * vt;
            let i_to = a.ytf * vf + a.ytt * vt;
            BranchPower {
                s_from: vf * i_from.conj() * base,
                s_to: vt * i_to.conj() * base,
            }
        })
        .collect()
}

/// `(|S_from|, |S_to|)` for every branch, MVA.
pub fn branch_apparent_flows(case: &NetworkCase, solution: &PowerFlowSolution) -> Vec<(f64, f64)> {
    branch_powers(case, solution)
        .iter()
        .map(|p| (p.s_from.norm(), p.s_to.norm()))
        .collect()
}

/// Active loss as `sum g_k (V_i^2/t^2 + V_j^2 - 2 V_i V_j cos(d_ij)/t)`, MW.
pub fn loss_from_branch_conductance(case: &NetworkCase, solution: &PowerFlowSolution) -> f64 {
    let total: f64 = case
        .branches()
        .iter()
        .enumerate()
        .map(|(k, br)| {
            let f = case.bus_index(br.from_bus).expect("validated");
            let t = case.bus_index(br.to_bus).expect("validated");
            let g = br.r / (br.r * br.r + br.x * br.x);
            let tap = solution.branch_ratio[k];
            let (vi, vj) = (solution.v[f], solution.v[t]);
            let delta = solution.theta[f] - solution.theta[t];
            g * (vi * vi / (tap * tap) + vj * vj - 2.0 * vi * vj * delta.cos() / tap)
        })
        .sum();
    total * case.base_mva()
}

/// Reactive power absorbed by branch series reactances, reported with a
/// negative sign, MVAr.
pub(crate) fn series_reactive_loss(case: &NetworkCase, solution: &PowerFlowSolution) -> f64 {
    let total: f64 = case
        .branches()
        .iter()
        .enumerate()
        .map(|(k, br)| {
            let (vf, vt) = terminals(case, solution, k);
            let ys = Complex64::new(br.r, br.x).inv();
            let i_series = (vf / solution.branch_ratio[k] - vt) * ys;
            br.x * i_series.norm_sqr()
        })
        .sum();
    -total * case.base_mva()
}
