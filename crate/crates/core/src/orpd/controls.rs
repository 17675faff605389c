use serde::{Deserialize, Serialize};

use super::OrpdError;
use crate::bounds::Bounds;
use crate::netmodel::NetworkCase;

/// Decision variables: generator voltage setpoints, regulating-transformer
/// taps and compensator injections (p.u. on the case base).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub v_gen: Vec<f64>,
    pub taps: Vec<f64>,
    pub q_shunt: Vec<f64>,
}

impl ControlVector {
    /// The operating point stored in the case file.
    pub fn base(case: &NetworkCase) -> Self {
        let branches = case.branches();
        Self {
            v_gen: case.generators().iter().map(|g| g.v_set).collect(),
            taps: case
                .regulating_transformers()
                .into_iter()
                .map(|k| branches[k].tap_ratio)
                .collect(),
            q_shunt: case.shunts().iter().map(|s| s.q_init / case.base_mva()).collect(),
        }
    }

    pub fn from_flat(case: &NetworkCase, x: &[f64]) -> Result<Self, OrpdError> {
        let (ng, nt) = (case.n_generators(), case.n_transformers());
        if x.len() != case.control_dimension() {
            return Err(OrpdError::Dimension {
                expected: case.control_dimension(),
                got: x.len(),
            });
        }
        Ok(Self {
            v_gen: x[..ng].to_vec(),
            taps: x[ng..ng + nt].to_vec(),
            q_shunt: x[ng + nt..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        x.extend_from_slice(&self.v_gen);
        x.extend_from_slice(&self.taps);
        x.extend_from_slice(&self.q_shunt);
        x
    }

    pub fn len(&self) -> usize {
        self.v_gen.len() + self.taps.len() + self.q_shunt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Box bounds and display labels of a case's control vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSpace {
    bounds: Bounds,
    labels: Vec<String>,
    n_gen: usize,
    n_tap: usize,
}

impl ControlSpace {
    pub fn new(case: &NetworkCase) -> Self {
        let base = case.base_mva();
        let branches = case.branches();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut labels = Vec::new();
        for g in case.generators() {
            lower.push(g.v_min);
            upper.push(g.v_max);
            labels.push(format!("V_G{}", g.bus));
        }
        for k in case.regulating_transformers() {
            let br = &branches[k];
            let range = br.tap_control.expect("regulating transformer has a range");
            lower.push(range.min);
            upper.push(range.max);
            labels.push(format!("T_{}-{}", br.from_bus, br.to_bus));
        }
        for s in case.shunts() {
            lower.push(s.q_min / base);
            upper.push(s.q_max / base);
            labels.push(format!("Q_C{}", s.bus));
        }
        Self {
            bounds: Bounds::new(lower, upper).expect("validated case limits"),
            labels,
            n_gen: case.n_generators(),
            n_tap: case.n_transformers(),
        }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Projects `raw` onto the bounds and splits it into its three groups.
    pub fn clamp(&self, raw: &[f64]) -> Result<ControlVector, OrpdError> {
        let x = self.bounds.clamp(raw).map_err(|_| OrpdError::Dimension {
            expected: self.dim(),
            got: raw.len(),
        })?;
        Ok(self.split(&x))
    }

    fn split(&self, x: &[f64]) -> ControlVector {
        let (g, t) = (self.n_gen, self.n_gen + self.n_tap);
        ControlVector {
            v_gen: x[..g].to_vec(),
            taps: x[g..t].to_vec(),
            q_shunt: x[t..].to_vec(),
        }
    }

    /// Snaps taps and compensator injections to a grid anchored at their lower
    /// bounds, staying inside the box. `None` leaves that group continuous.
    pub fn round_discrete(
        &self,
        controls: &ControlVector,
        tap_step: Option<f64>,
        shunt_step: Option<f64>,
    ) -> ControlVector {
        let mut x = controls.to_flat();
        let snap = |v: f64, lo: f64, hi: f64, step: f64| (lo + ((v - lo) / step).round() * step).clamp(lo, hi);
        let (lo, hi) = (self.bounds.lower(), self.bounds.upper());
        let ranges = [
            (self.n_gen..self.n_gen + self.n_tap, tap_step),
            (self.n_gen + self.n_tap..self.dim(), shunt_step),
        ];
        for (range, step) in ranges {
            if let Some(step) = step.filter(|s| *s > 0.0) {
                for k in range {
                    x[k] = snap(x[k], lo[k], hi[k], step);
                }
            }
        }
        self.split(&x)
    }
}

/// Projects a raw position onto the control bounds of `space`.
pub fn clamp_controls(raw: &[f64], space: &ControlSpace) -> Result<ControlVector, OrpdError> {
    space.clamp(raw)
}
