//! Network data model.
//!
//! A [`NetworkCase`] is built once (from a MATPOWER-style case file or
//! programmatically via [`NetworkCase::new`]), validated, and never mutated
//! afterwards. Powers are stored in MW/MVAr, impedances and bus shunts in
//! p.u. on the case base.

mod embedded;
mod parse;
mod write;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embedded::{embedded_case, EmbeddedCase, UnknownCaseName};
pub use parse::parse_case;
pub use write::write_case;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required matrix `mpc.{0}`")]
    MissingMatrix(&'static str),
    #[error("{record}: references unknown bus {bus}")]
    UnknownBus { record: String, bus: u32 },
    #[error("expected exactly one slack bus, found {count}")]
    SlackCount { count: usize },
    #[error("network is not connected: bus {bus} is not reachable from the slack bus")]
    Disconnected { bus: u32 },
    #[error("{record}: zero series reactance")]
    ZeroReactance { record: String },
    #[error("{record}: {reason}")]
    Invalid { record: String, reason: String },
}

impl CaseError {
    fn invalid(record: impl Into<String>, reason: impl Into<String>) -> Self {
        CaseError::Invalid {
            record: record.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BusKind {
    Slack,
    PV,
    PQ,
}

impl BusKind {
    pub fn matpower_code(self) -> u8 {
        match self {
            BusKind::PQ => 1,
            BusKind::PV => 2,
            BusKind::Slack => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    /// MW
    pub p_demand: f64,
    /// MVAr
    pub q_demand: f64,
    /// p.u. conductance at 1 p.u. voltage
    pub base_shunt_g: f64,
    /// p.u. susceptance at 1 p.u. voltage
    pub base_shunt_b: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_init: f64,
    /// degrees
    pub angle_init: f64,
    pub area: u32,
    pub base_kv: f64,
    pub zone: u32,
}

impl Bus {
    /// A bus with no load, no shunt, flat voltage and limits `[0.9, 1.1]`.
    pub fn new(id: u32, kind: BusKind) -> Self {
        Self {
            id,
            kind,
            p_demand: 0.0,
            q_demand: 0.0,
            base_shunt_g: 0.0,
            base_shunt_b: 0.0,
            v_min: 0.9,
            v_max: 1.1,
            v_init: 1.0,
            angle_init: 0.0,
            area: 1,
            base_kv: 0.0,
            zone: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: u32,
    pub to_bus: u32,
    pub r: f64,
    pub x: f64,
    /// total line charging susceptance, p.u.
    pub b_charging: f64,
    /// MVA; 0 means unlimited
    pub s_max: f64,
    pub rate_b: f64,
    pub rate_c: f64,
    /// off-nominal ratio on the from side; 1.0 for lines
    pub tap_ratio: f64,
    pub is_transformer: bool,
    /// present iff the transformer is tap-regulating (a control variable)
    pub tap_control: Option<TapRange>,
    pub ang_min: f64,
    pub ang_max: f64,
}

impl Branch {
    /// A plain line without charging or rating.
    pub fn line(from_bus: u32, to_bus: u32, r: f64, x: f64) -> Self {
        Self {
            from_bus,
            to_bus,
            r,
            x,
            b_charging: 0.0,
            s_max: 0.0,
            rate_b: 0.0,
            rate_c: 0.0,
            tap_ratio: 1.0,
            is_transformer: false,
            tap_control: None,
            ang_min: -360.0,
            ang_max: 360.0,
        }
    }

    /// A tap-regulating transformer with ratio `tap` on the from side.
    pub fn transformer(from_bus: u32, to_bus: u32, r: f64, x: f64, tap: f64, range: TapRange) -> Self {
        Self {
            tap_ratio: tap,
            is_transformer: true,
            tap_control: Some(range),
            ..Self::line(from_bus, to_bus, r, x)
        }
    }

    pub fn is_tap_regulating(&self) -> bool {
        self.tap_control.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: u32,
    /// MW
    pub p_set: f64,
    /// MVAr, initial value from the case file (not used by the solver)
    pub q_init: f64,
    pub v_set: f64,
    /// MVAr
    pub q_min: f64,
    /// MVAr
    pub q_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub m_base: f64,
    pub p_max: f64,
    pub p_min: f64,
}

impl Generator {
    pub fn new(bus: u32, p_set: f64, v_set: f64) -> Self {
        Self {
            bus,
            p_set,
            q_init: 0.0,
            v_set,
            q_min: -9999.0,
            q_max: 9999.0,
            v_min: 0.9,
            v_max: 1.1,
            m_base: 100.0,
            p_max: 9999.0,
            p_min: 0.0,
        }
    }
}

/// Switchable reactive injection at a bus (positive = capacitive), MVAr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuntCompensator {
    pub bus: u32,
    pub q_min: f64,
    pub q_max: f64,
    pub q_init: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub name: String,
    pub base_mva: f64,
    pub n_buses: usize,
    pub n_generators: usize,
    pub n_pq: usize,
    pub n_branches: usize,
    pub n_transformers: usize,
    pub n_shunts: usize,
    pub total_p_demand: f64,
    pub total_q_demand: f64,
    /// control-space dimensionality NG + NT + NC
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    name: String,
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    generators: Vec<Generator>,
    shunts: Vec<ShuntCompensator>,
    #[serde(skip)]
    index: HashMap<u32, usize>,
}

impl NetworkCase {
    /// Validates and assembles a case. List order is preserved.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
        shunts: Vec<ShuntCompensator>,
    ) -> Result<Self, CaseError> {
        if !(base_mva.is_finite() && base_mva > 0.0) {
            return Err(CaseError::invalid("baseMVA", "must be positive"));
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            validate_bus(bus)?;
            if index.insert(bus.id, i).is_some() {
                return Err(CaseError::invalid(format!("bus {}", bus.id), "duplicate bus number"));
            }
        }
        let slack_count = buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slack_count != 1 {
            return Err(CaseError::SlackCount { count: slack_count });
        }

        let resolve = |record: &dyn Fn() -> String, bus: u32| -> Result<usize, CaseError> {
            index
                .get(&bus)
                .copied()
                .ok_or_else(|| CaseError::UnknownBus { record: record(), bus })
        };

        for (k, br) in branches.iter().enumerate() {
            let record = || format!("branch {} ({}-{})", k + 1, br.from_bus, br.to_bus);
            resolve(&record, br.from_bus)?;
            resolve(&record, br.to_bus)?;
            validate_branch(br, &record)?;
        }

        let mut gen_at_bus = vec![false; buses.len()];
        for (k, g) in generators.iter().enumerate() {
            let record = || format!("generator {} (bus {})", k + 1, g.bus);
            let bi = resolve(&record, g.bus)?;
            if buses[bi].kind == BusKind::PQ {
                return Err(CaseError::invalid(record(), "generator bus must be slack or PV"));
            }
            if std::mem::replace(&mut gen_at_bus[bi], true) {
                return Err(CaseError::invalid(record(), "more than one generator at the bus"));
            }
            validate_generator(g, &record)?;
        }
        for (bi, bus) in buses.iter().enumerate() {
            if bus.kind != BusKind::PQ && !gen_at_bus[bi] {
                return Err(CaseError::invalid(
                    format!("bus {}", bus.id),
                    "voltage-controlled bus has no generator",
                ));
            }
        }

        let mut shunt_at_bus = vec![false; buses.len()];
        for (k, sh) in shunts.iter().enumerate() {
            let record = || format!("shunt compensator {} (bus {})", k + 1, sh.bus);
            let bi = resolve(&record, sh.bus)?;
            if std::mem::replace(&mut shunt_at_bus[bi], true) {
                return Err(CaseError::invalid(record(), "more than one compensator at the bus"));
            }
            if !(sh.q_min.is_finite() && sh.q_max.is_finite() && sh.q_init.is_finite()) {
                return Err(CaseError::invalid(record(), "non-finite limit"));
            }
            if !(0.0 <= sh.q_min && sh.q_min < sh.q_max) {
                return Err(CaseError::invalid(record(), "limits must satisfy 0 <= Qmin < Qmax"));
            }
            if !(sh.q_min <= sh.q_init && sh.q_init <= sh.q_max) {
                return Err(CaseError::invalid(record(), "initial injection outside its limits"));
            }
        }

        let case = Self {
            name: name.into(),
            base_mva,
            buses,
            branches,
            generators,
            shunts,
            index,
        };
        case.check_connected()?;
        Ok(case)
    }

    fn check_connected(&self) -> Result<(), CaseError> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let (f, t) = (self.index[&br.from_bus], self.index[&br.to_bus]);
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.slack_index()]);
        seen[self.slack_index()] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !std::mem::replace(&mut seen[j], true) {
                    queue.push_back(j);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(i) => Err(CaseError::Disconnected { bus: self.buses[i].id }),
            None => Ok(()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn shunts(&self) -> &[ShuntCompensator] {
        &self.shunts
    }

    /// Internal (0-based, file order) index of an external bus number.
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn slack_index(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated case has a slack bus")
    }

    /// Internal indices of PQ buses, in bus order.
    pub fn pq_indices(&self) -> Vec<usize> {
        self.indices_of(|k| k == BusKind::PQ)
    }

    /// Internal indices of PV buses, in bus order.
    pub fn pv_indices(&self) -> Vec<usize> {
        self.indices_of(|k| k == BusKind::PV)
    }

    fn indices_of(&self, pred: impl Fn(BusKind) -> bool) -> Vec<usize> {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| pred(b.kind))
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices (into `branches`) of tap-regulating transformers, in branch order.
    pub fn regulating_transformers(&self) -> Vec<usize> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_tap_regulating())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_pq(&self) -> usize {
        self.buses.iter().filter(|b| b.kind == BusKind::PQ).count()
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn n_transformers(&self) -> usize {
        self.branches.iter().filter(|b| b.is_tap_regulating()).count()
    }

    pub fn n_shunts(&self) -> usize {
        self.shunts.len()
    }

    pub fn control_dimension(&self) -> usize {
        self.n_generators() + self.n_transformers() + self.n_shunts()
    }

    pub fn summary(&self) -> CaseSummary {
        case_summary(self)
    }

    /// Structural equality with numeric fields compared to a relative tolerance.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0);
        let buses = self.buses.len() == other.buses.len()
            && self.buses.iter().zip(&other.buses).all(|(a, b)| {
                a.id == b.id
                    && a.kind == b.kind
                    && a.area == b.area
                    && a.zone == b.zone
                    && [
                        (a.p_demand, b.p_demand),
                        (a.q_demand, b.q_demand),
                        (a.base_shunt_g, b.base_shunt_g),
                        (a.base_shunt_b, b.base_shunt_b),
                        (a.v_min, b.v_min),
                        (a.v_max, b.v_max),
                        (a.v_init, b.v_init),
                        (a.angle_init, b.angle_init),
                        (a.base_kv, b.base_kv),
                    ]
                    .iter()
                    .all(|&(x, y)| close(x, y))
            });
        buses
            && close(self.base_mva, other.base_mva)
            && self.name == other.name
            && self.branches == other.branches
            && self.generators == other.generators
            && self.shunts == other.shunts
    }
}

pub fn case_summary(case: &NetworkCase) -> CaseSummary {
    CaseSummary {
        name: case.name.clone(),
        base_mva: case.base_mva,
        n_buses: case.n_buses(),
        n_generators: case.n_generators(),
        n_pq: case.n_pq(),
        n_branches: case.n_branches(),
        n_transformers: case.n_transformers(),
        n_shunts: case.n_shunts(),
        total_p_demand: case.buses.iter().map(|b| b.p_demand).sum(),
        total_q_demand: case.buses.iter().map(|b| b.q_demand).sum(),
        dimension: case.control_dimension(),
    }
}

fn validate_bus(bus: &Bus) -> Result<(), CaseError> {
    let record = || format!("bus {}", bus.id);
    if bus.id == 0 {
        return Err(CaseError::invalid(record(), "bus number must be positive"));
    }
    let fields = [
        bus.p_demand,
        bus.q_demand,
        bus.base_shunt_g,
        bus.base_shunt_b,
        bus.v_min,
        bus.v_max,
        bus.v_init,
        bus.angle_init,
    ];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(CaseError::invalid(record(), "non-finite field"));
    }
    if bus.v_min >= bus.v_max {
        return Err(CaseError::invalid(record(), "Vmin must be below Vmax"));
    }
    if !(0.5..=1.5).contains(&bus.v_init) {
        return Err(CaseError::invalid(record(), "initial voltage outside [0.5, 1.5] p.u."));
    }
    Ok(())
}

fn validate_branch(br: &Branch, record: &dyn Fn() -> String) -> Result<(), CaseError> {
    if br.from_bus == br.to_bus {
        return Err(CaseError::invalid(record(), "branch connects a bus to itself"));
    }
    let fields = [br.r, br.x, br.b_charging, br.s_max, br.tap_ratio];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(CaseError::invalid(record(), "non-finite field"));
    }
    if br.x == 0.0 {
        return Err(CaseError::ZeroReactance { record: record() });
    }
    if br.s_max < 0.0 {
        return Err(CaseError::invalid(record(), "negative rating"));
    }
    if br.tap_ratio <= 0.0 {
        return Err(CaseError::invalid(record(), "tap ratio must be positive"));
    }
    if !br.is_transformer && br.tap_ratio != 1.0 {
        return Err(CaseError::invalid(
            record(),
            "off-nominal ratio on a non-transformer branch",
        ));
    }
    if let Some(range) = br.tap_control {
        if !br.is_transformer {
            return Err(CaseError::invalid(record(), "tap limits on a non-transformer branch"));
        }
        if !(range.min <= br.tap_ratio && br.tap_ratio <= range.max) {
            return Err(CaseError::invalid(
                record(),
                format!("tap {} outside [{}, {}]", br.tap_ratio, range.min, range.max),
            ));
        }
    }
    Ok(())
}

fn validate_generator(g: &Generator, record: &dyn Fn() -> String) -> Result<(), CaseError> {
    let fields = [g.p_set, g.v_set, g.q_min, g.q_max, g.v_min, g.v_max];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(CaseError::invalid(record(), "non-finite field"));
    }
    if g.q_min >= g.q_max {
        return Err(CaseError::invalid(record(), "Qmin must be below Qmax"));
    }
    if g.v_min >= g.v_max {
        return Err(CaseError::invalid(record(), "Vmin must be below Vmax"));
    }
    if !(0.5..=1.5).contains(&g.v_set) {
        return Err(CaseError::invalid(record(), "voltage setpoint outside [0.5, 1.5] p.u."));
    }
    Ok(())
}
