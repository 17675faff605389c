use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PowerFlowError;
use crate::netmodel::{Branch, NetworkCase};

/// Two-port admittances of one branch in the standard pi model with the
/// off-nominal ratio on the from side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub yff: Complex64,
    pub yft: Complex64,
    pub ytf: Complex64,
    pub ytt: Complex64,
}

pub fn branch_admittance(br: &Branch, tap: f64) -> BranchAdmittance {
    let ys = Complex64::new(br.r, br.x).inv();
    let half_b = Complex64::new(0.0, br.b_charging / 2.0);
    let ytt = ys + half_b;
    BranchAdmittance {
        yff: ytt / (tap * tap),
        yft: -ys / tap,
        ytf: -ys / tap,
        ytt,
    }
}

/// Dense complex bus admittance matrix in p.u., indexed by internal bus order.
#[derive(Debug, Clone, PartialEq)]
pub struct YbusMatrix {
    matrix: DMatrix<Complex64>,
}

impl YbusMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

/// Effective ratio of every branch given the regulating-transformer taps (branch order).
pub(crate) fn branch_ratios(case: &NetworkCase, taps: &[f64]) -> Result<Vec<f64>, PowerFlowError> {
    let regulating = case.regulating_transformers();
    if taps.len() != regulating.len() {
        return Err(PowerFlowError::DimensionMismatch {
            what: "transformer taps",
            expected: regulating.len(),
            got: taps.len(),
        });
    }
    let mut ratios: Vec<f64> = case.branches().iter().map(|b| b.tap_ratio).collect();
    for (&k, &t) in regulating.iter().zip(taps) {
        ratios[k] = t;
    }
    Ok(ratios)
}

/// Per-bus shunt admittance in p.u.; compensator buses use the commanded MVAr
/// instead of the case's fixed susceptance.
pub(crate) fn bus_shunts(case: &NetworkCase, shunt_q_mvar: &[f64]) -> Result<Vec<Complex64>, PowerFlowError> {
    if shunt_q_mvar.len() != case.n_shunts() {
        return Err(PowerFlowError::DimensionMismatch {
            what: "shunt injections",
            expected: case.n_shunts(),
            got: shunt_q_mvar.len(),
        });
    }
    let mut ysh: Vec<Complex64> = case
        .buses()
        .iter()
        .map(|b| Complex64::new(b.base_shunt_g, b.base_shunt_b))
        .collect();
    for (sh, &q) in case.shunts().iter().zip(shunt_q_mvar) {
        let i = case.bus_index(sh.bus).expect("validated");
        // b = Q / (base * V_nom^2), V_nom = 1 p.u.
        ysh[i].im = q / case.base_mva();
    }
    Ok(ysh)
}

/// Assembles Ybus for the given transformer taps and compensator injections (MVAr).
pub fn build_ybus(case: &NetworkCase, taps: &[f64], shunt_q_mvar: &[f64]) -> Result<YbusMatrix, PowerFlowError> {
    let ratios = branch_ratios(case, taps)?;
    let ysh = bus_shunts(case, shunt_q_mvar)?;
    Ok(assemble(case, &ratios, &ysh))
}

pub(crate) fn assemble(case: &NetworkCase, ratios: &[f64], ysh: &[Complex64]) -> YbusMatrix {
    let n = case.n_buses();
    let mut y = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(ysh));
    for (br, &tap) in case.branches().iter().zip(ratios) {
        let f = case.bus_index(br.from_bus).expect("validated");
        let t = case.bus_index(br.to_bus).expect("validated");
        let a = branch_admittance(br, tap);
        y[(f, f)] += a.yff;
        y[(f, t)] += a.yft;
        y[(t, f)] += a.ytf;
        y[(t, t)] += a.ytt;
    }
    debug_assert_eq!(y.nrows(), n);
    YbusMatrix { matrix: y }
}
