use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OrpdError;
use crate::netmodel::NetworkCase;
use crate::powerflow::{assemble, bus_shunts, loss_from_branch_conductance, PowerFlowSolution};

/// Total active loss over all branches, MW.
pub fn objective_ploss(case: &NetworkCase, solution: &PowerFlowSolution) -> f64 {
    loss_from_branch_conductance(case, solution)
}

/// Sum of `|V - 1|` over load buses, p.u.
pub fn objective_tvd(case: &NetworkCase, solution: &PowerFlowSolution) -> f64 {
    case.pq_indices().iter().map(|&i| (solution.v[i] - 1.0).abs()).sum()
}

/// Largest L-index over load buses.
pub fn objective_lindex(case: &NetworkCase, solution: &PowerFlowSolution) -> Result<f64, OrpdError> {
    Ok(lindex_per_bus(case, solution)?.into_iter().fold(0.0, f64::max))
}

/// L-index of every load bus, in `case.pq_indices()` order.
///
/// `F = -Y_LL^{-1} Y_LG`, where `L` are the PQ buses and `G` the PV buses plus
/// the slack; `L_j = |1 - sum_i F_ji V_i / V_j|` with complex voltages.
pub fn lindex_per_bus(case: &NetworkCase, solution: &PowerFlowSolution) -> Result<Vec<f64>, OrpdError> {
    let load = case.pq_indices();
    if load.is_empty() {
        return Ok(Vec::new());
    }
    let gen: Vec<usize> = (0..case.n_buses()).filter(|i| !load.contains(i)).collect();
    let ysh = bus_shunts(case, &solution.shunt_q_mvar).map_err(|_| OrpdError::Dimension {
        expected: case.n_shunts(),
        got: solution.shunt_q_mvar.len(),
    })?;
    let y = assemble(case, &solution.branch_ratio, &ysh).into_matrix();

    let y1 = DMatrix::from_fn(load.len(), load.len(), |r, c| y[(load[r], load[c])]);
    let y2 = DMatrix::from_fn(load.len(), gen.len(), |r, c| y[(load[r], gen[c])]);
    let f = -y1.lu().solve(&y2).ok_or(OrpdError::SingularPartition)?;
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OrpdError::SingularPartition);
    }

    let v = solution.phasors();
    Ok(load
        .iter()
        .enumerate()
        .map(|(r, &j)| {
            let sum: Complex64 = gen.iter().enumerate().map(|(c, &i)| f[(r, c)] * v[i]).sum();
            (Complex64::new(1.0, 0.0) - sum / v[j]).norm()
        })
        .collect())
}
