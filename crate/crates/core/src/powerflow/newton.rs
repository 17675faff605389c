use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::netmodel::{BusKind, NetworkCase};

/// Polar-form power balance equations of one network at fixed injections.
///
/// The state vector is `[theta(pv ++ pq), |V|(pq)]`; the mismatch vector is
/// `[dP(pv ++ pq), dQ(pq)]` with `dS = V * conj(Y V) - S_spec` in p.u.
#[derive(Debug, Clone)]
pub struct NewtonSystem {
    ybus: DMatrix<Complex64>,
    pvpq: Vec<usize>,
    pq: Vec<usize>,
    p_spec: Vec<f64>,
    q_spec: Vec<f64>,
}

fn phasors(vm: &[f64], va: &[f64]) -> Vec<Complex64> {
    vm.iter().zip(va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect()
}

impl NewtonSystem {
    /// Scheduled injections come from generator `p_set` and bus demand; PV and
    /// slack magnitudes are whatever the caller puts in the voltage vector.
    pub fn new(case: &NetworkCase, ybus: DMatrix<Complex64>) -> Self {
        let base = case.base_mva();
        let mut p_spec: Vec<f64> = case.buses().iter().map(|b| -b.p_demand / base).collect();
        let q_spec: Vec<f64> = case.buses().iter().map(|b| -b.q_demand / base).collect();
        for g in case.generators() {
            p_spec[case.bus_index(g.bus).expect("validated")] += g.p_set / base;
        }
        let pvpq = case
            .buses()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind != BusKind::Slack)
            .map(|(i, _)| i)
            .collect();
        Self {
            ybus,
            pvpq,
            pq: case.pq_indices(),
            p_spec,
            q_spec,
        }
    }

    pub fn state_len(&self) -> usize {
        self.pvpq.len() + self.pq.len()
    }

    pub fn state(&self, vm: &[f64], va: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.state_len(),
            self.pvpq.iter().map(|&i| va[i]).chain(self.pq.iter().map(|&i| vm[i])),
        )
    }

    /// Writes a state vector back into full magnitude/angle arrays.
    pub fn set_state(&self, x: &DVector<f64>, vm: &mut [f64], va: &mut [f64]) {
        let n = self.pvpq.len();
        for (k, &i) in self.pvpq.iter().enumerate() {
            va[i] = x[k];
        }
        for (k, &i) in self.pq.iter().enumerate() {
            vm[i] = x[n + k];
        }
    }

    fn current(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n).map(|i| (0..n).map(|j| self.ybus[(i, j)] * v[j]).sum()).collect()
    }

    /// Complex power injected at every bus, p.u.
    pub fn injections(&self, vm: &[f64], va: &[f64]) -> Vec<Complex64> {
        let v = phasors(vm, va);
        let i = self.current(&v);
        v.iter().zip(&i).map(|(v, i)| v * i.conj()).collect()
    }

    pub fn mismatch(&self, vm: &[f64], va: &[f64]) -> DVector<f64> {
        let s = self.injections(vm, va);
        DVector::from_iterator(
            self.state_len(),
            self.pvpq
                .iter()
                .map(|&i| s[i].re - self.p_spec[i])
                .chain(self.pq.iter().map(|&i| s[i].im - self.q_spec[i])),
        )
    }

    /// Analytic Jacobian of [`mismatch`](Self::mismatch) with respect to the state.
    pub fn jacobian(&self, vm: &[f64], va: &[f64]) -> DMatrix<f64> {
        let n = vm.len();
        let v = phasors(vm, va);
        let ibus = self.current(&v);
        let unit: Vec<Complex64> = va.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        let j = Complex64::i();

        // dS_i/dtheta_k and dS_i/d|V|_k
        let ds_dva = |i: usize, k: usize| -> Complex64 {
            let mut d = -j * v[i] * (self.ybus[(i, k)] * v[k]).conj();
            if i == k {
                d += j * v[i] * ibus[i].conj();
            }
            d
        };
        let ds_dvm = |i: usize, k: usize| -> Complex64 {
            let mut d = v[i] * (self.ybus[(i, k)] * unit[k]).conj();
            if i == k {
                d += ibus[i].conj() * unit[i];
            }
            d
        };
        debug_assert_eq!(n, self.ybus.nrows());

        let npvpq = self.pvpq.len();
        let dim = self.state_len();
        let mut jac = DMatrix::zeros(dim, dim);
        for (r, &i) in self.pvpq.iter().enumerate() {
            for (c, &k) in self.pvpq.iter().enumerate() {
                jac[(r, c)] = ds_dva(i, k).re;
            }
            for (c, &k) in self.pq.iter().enumerate() {
                jac[(r, npvpq + c)] = ds_dvm(i, k).re;
            }
        }
        for (r, &i) in self.pq.iter().enumerate() {
            for (c, &k) in self.pvpq.iter().enumerate() {
                jac[(npvpq + r, c)] = ds_dva(i, k).im;
            }
            for (c, &k) in self.pq.iter().enumerate() {
                jac[(npvpq + r, npvpq + c)] = ds_dvm(i, k).im;
            }
        }
        jac
    }
}

pub(crate) enum NewtonOutcome {
    Converged { iterations: usize, max_mismatch: f64 },
    NotConverged { iterations: usize, max_mismatch: f64 },
    Singular { iteration: usize },
}

fn inf_norm(x: &DVector<f64>) -> f64 {
    x.iter()
        .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

/// Runs Newton iterations in place on `vm`/`va`.
pub(crate) fn iterate(
    system: &NewtonSystem,
    vm: &mut [f64],
    va: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> NewtonOutcome {
    let mut f = system.mismatch(vm, va);
    let mut norm = inf_norm(&f);
    let mut it = 0;
    while it < max_iterations {
        if norm <= tolerance {
            return NewtonOutcome::Converged {
                iterations: it,
                max_mismatch: norm,
            };
        }
        if !norm.is_finite() {
            break;
        }
        it += 1;
        let jac = system.jacobian(vm, va);
        let Some(dx) = jac.lu().solve(&(-&f)) else {
            return NewtonOutcome::Singular { iteration: it };
        };
        if dx.iter().any(|v| !v.is_finite()) {
            return NewtonOutcome::Singular { iteration: it };
        }
        let x = system.state(vm, va) + dx;
        system.set_state(&x, vm, va);
        f = system.mismatch(vm, va);
        norm = inf_norm(&f);
    }
    if norm <= tolerance {
        NewtonOutcome::Converged {
            iterations: it,
            max_mismatch: norm,
        }
    } else {
        NewtonOutcome::NotConverged {
            iterations: it,
            max_mismatch: norm,
        }
    }
}
