//! MATPOWER case-file reader.
//!
//! Accepts the version-2 matrix layout (`mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
//! `mpc.branch`) plus three optional dispatch blocks:
//!
//! - `mpc.gen_vlim   = [bus Vmin Vmax]`, one row per generator row
//! - `mpc.tap_ctrl   = [branch_row fbus tbus Tmin Tmax]`
//! - `mpc.shunt_ctrl = [bus Qmin Qmax Qinit]` in MVAr
//!
//! Without `tap_ctrl` every branch with a nonzero ratio is treated as a
//! regulating transformer with limits `[0.9, 1.1]` widened to include its
//! ratio. Without `shunt_ctrl` the case has no compensators.

use std::collections::HashMap;

use super::{Branch, Bus, BusKind, CaseError, Generator, NetworkCase, ShuntCompensator, TapRange};

const IGNORED: &[&str] = &["version", "gencost", "areas", "bus_name", "gentype", "genfuel"];

struct Matrix {
    line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

#[derive(Default)]
struct RawCase {
    name: Option<String>,
    base_mva: Option<f64>,
    matrices: HashMap<String, Matrix>,
}

enum State {
    Top,
    Matrix {
        name: String,
        start: usize,
        rows: Vec<(usize, Vec<f64>)>,
        row: Vec<f64>,
    },
    Cell,
}

/// Parses MATPOWER case text into a validated [`NetworkCase`].
pub fn parse_case(text: &str) -> Result<NetworkCase, CaseError> {
    let raw = tokenize(text)?;
    build(raw)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '\'' => quoted = !quoted,
            '%' | '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn syntax(line: usize, message: impl Into<String>) -> CaseError {
    CaseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, CaseError> {
    token
        .parse::<f64>()
        .map_err(|_| syntax(line, format!("invalid number `{token}`")))
}

fn tokenize(text: &str) -> Result<RawCase, CaseError> {
    let mut raw = RawCase::default();
    let mut state = State::Top;

    for (i, full) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut rest = strip_comment(full).trim();

        loop {
            if rest.is_empty() {
                break;
            }
            match &mut state {
                State::Cell => match rest.find('}') {
                    Some(pos) => {
                        rest = rest[pos + 1..].trim_start().trim_start_matches(';').trim();
                        state = State::Top;
                    }
                    None => rest = "",
                },
                State::Matrix { name, start, rows, row } => {
                    let (body, closed) = match rest.find(']') {
                        Some(pos) => (&rest[..pos], Some(pos)),
                        None => (rest, None),
                    };
                    for (k, chunk) in body.split(';').enumerate() {
                        if k > 0 && !row.is_empty() {
                            rows.push((lineno, std::mem::take(row)));
                        }
                        for tok in chunk.split(|c: char| c.is_whitespace() || c == ',') {
                            if !tok.is_empty() {
                                row.push(parse_number(tok, lineno)?);
                            }
                        }
                    }
                    match closed {
                        Some(pos) => {
                            if !row.is_empty() {
                                rows.push((lineno, std::mem::take(row)));
                            }
                            let tail = rest[pos + 1..].trim();
                            if !(tail.is_empty() || tail == ";") {
                                return Err(syntax(lineno, format!("unexpected `{tail}` after matrix")));
                            }
                            let matrix = Matrix {
                                line: *start,
                                rows: std::mem::take(rows),
                            };
                            let name = std::mem::take(name);
                            if raw.matrices.insert(name.clone(), matrix).is_some() {
                                return Err(syntax(lineno, format!("matrix `mpc.{name}` defined twice")));
                            }
                            state = State::Top;
                        }
                        None => {
                            // a line break ends a row
                            if !row.is_empty() {
                                rows.push((lineno, std::mem::take(row)));
                            }
                        }
                    }
                    rest = "";
                }
                State::Top => {
                    if let Some(decl) = rest.strip_prefix("function") {
                        let name = decl.split('=').nth(1).map(str::trim).unwrap_or("");
                        if name.is_empty() {
                            return Err(syntax(lineno, "malformed function declaration"));
                        }
                        raw.name = Some(name.to_string());
                        rest = "";
                        continue;
                    }
                    if rest == "end" || rest == "return" || rest == "end;" || rest == "return;" {
                        rest = "";
                        continue;
                    }
                    let Some(assign) = rest.strip_prefix("mpc.") else {
                        return Err(syntax(lineno, format!("unrecognised statement `{rest}`")));
                    };
                    let Some((lhs, rhs)) = assign.split_once('=') else {
                        return Err(syntax(lineno, "expected `=`"));
                    };
                    let field = lhs.trim();
                    if field.is_empty() || !field.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(syntax(lineno, format!("invalid field name `{field}`")));
                    }
                    let rhs = rhs.trim();
                    if let Some(body) = rhs.strip_prefix('[') {
                        state = State::Matrix {
                            name: field.to_string(),
                            start: lineno,
                            rows: Vec::new(),
                            row: Vec::new(),
                        };
                        rest = body.trim();
                        if rest.is_empty() {
                            break;
                        }
                        continue;
                    }
                    if let Some(body) = rhs.strip_prefix('{') {
                        state = State::Cell;
                        rest = body.trim();
                        continue;
                    }
                    let value = rhs.trim_end_matches(';').trim();
                    if value.starts_with('\'') {
                        if field != "version" {
                            log::warn!("line {lineno}: ignoring string field `mpc.{field}`");
                        }
                    } else if field == "baseMVA" {
                        raw.base_mva = Some(parse_number(value, lineno)?);
                    } else {
                        parse_number(value, lineno)?;
                        log::warn!("line {lineno}: ignoring unknown scalar `mpc.{field}`");
                    }
                    rest = "";
                }
            }
        }
    }
    match state {
        State::Top => Ok(raw),
        State::Matrix { start, .. } => Err(syntax(start, "unterminated matrix")),
        State::Cell => Err(syntax(text.lines().count(), "unterminated cell array")),
    }
}

fn require_columns(name: &str, m: &Matrix, min: usize) -> Result<(), CaseError> {
    for (line, row) in &m.rows {
        if row.len() < min {
            return Err(syntax(
                *line,
                format!("`mpc.{name}` row has {} columns, expected at least {min}", row.len()),
            ));
        }
    }
    Ok(())
}

fn as_id(value: f64, line: usize, what: &str) -> Result<u32, CaseError> {
    if value.fract() != 0.0 || value < 0.0 || value > u32::MAX as f64 {
        return Err(syntax(
            line,
            format!("{what} must be a non-negative integer, got {value}"),
        ));
    }
    Ok(value as u32)
}

fn build(mut raw: RawCase) -> Result<NetworkCase, CaseError> {
    for name in raw.matrices.keys() {
        let known = ["bus", "gen", "branch", "gen_vlim", "tap_ctrl", "shunt_ctrl"];
        if !known.contains(&name.as_str()) && !IGNORED.contains(&name.as_str()) {
            log::warn!("ignoring unknown matrix `mpc.{name}`");
        }
    }
    let base_mva = raw.base_mva.ok_or(CaseError::MissingMatrix("baseMVA"))?;
    let bus_m = raw.matrices.remove("bus").ok_or(CaseError::MissingMatrix("bus"))?;
    let gen_m = raw.matrices.remove("gen").ok_or(CaseError::MissingMatrix("gen"))?;
    let branch_m = raw
        .matrices
        .remove("branch")
        .ok_or(CaseError::MissingMatrix("branch"))?;
    require_columns("bus", &bus_m, 13)?;
    require_columns("gen", &gen_m, 10)?;
    require_columns("branch", &branch_m, 11)?;

    let mut buses = Vec::with_capacity(bus_m.rows.len());
    for (line, r) in &bus_m.rows {
        let line = *line;
        let kind = match r[1] as i64 {
            1 => BusKind::PQ,
            2 => BusKind::PV,
            3 => BusKind::Slack,
            4 => return Err(syntax(line, "isolated buses (type 4) are not supported")),
            _ => return Err(syntax(line, format!("invalid bus type {}", r[1]))),
        };
        buses.push(Bus {
            id: as_id(r[0], line, "bus number")?,
            kind,
            p_demand: r[2],
            q_demand: r[3],
            base_shunt_g: r[4] / base_mva,
            base_shunt_b: r[5] / base_mva,
            area: as_id(r[6], line, "area")?,
            v_init: r[7],
            angle_init: r[8],
            base_kv: r[9],
            zone: as_id(r[10], line, "zone")?,
            v_max: r[11],
            v_min: r[12],
        });
    }
    let bus_vlim: HashMap<u32, (f64, f64)> = buses.iter().map(|b| (b.id, (b.v_min, b.v_max))).collect();

    let vlim_rows = match raw.matrices.remove("gen_vlim") {
        Some(m) => {
            require_columns("gen_vlim", &m, 3)?;
            if m.rows.len() != gen_m.rows.len() {
                return Err(syntax(
                    m.line,
                    format!(
                        "`mpc.gen_vlim` has {} rows, `mpc.gen` has {}",
                        m.rows.len(),
                        gen_m.rows.len()
                    ),
                ));
            }
            Some(m.rows)
        }
        None => None,
    };
    let mut generators = Vec::new();
    for (k, (line, r)) in gen_m.rows.iter().enumerate() {
        let bus = as_id(r[0], *line, "generator bus")?;
        let (v_min, v_max) = match &vlim_rows {
            Some(rows) => {
                let (vline, v) = &rows[k];
                if as_id(v[0], *vline, "generator bus")? != bus {
                    return Err(syntax(
                        *vline,
                        format!("`mpc.gen_vlim` row {} does not match generator bus {bus}", k + 1),
                    ));
                }
                (v[1], v[2])
            }
            None => bus_vlim.get(&bus).copied().unwrap_or((0.9, 1.1)),
        };
        if r[7] <= 0.0 {
            log::warn!("line {line}: skipping out-of-service generator at bus {bus}");
            continue;
        }
        generators.push(Generator {
            bus,
            p_set: r[1],
            q_init: r[2],
            q_max: r[3],
            q_min: r[4],
            v_set: r[5],
            m_base: r[6],
            p_max: r[8],
            p_min: r[9],
            v_min,
            v_max,
        });
    }

    // file row (1-based) -> model index
    let mut branch_rows = HashMap::new();
    let mut branches = Vec::new();
    for (k, (line, r)) in branch_m.rows.iter().enumerate() {
        let line = *line;
        let (from_bus, to_bus) = (as_id(r[0], line, "from bus")?, as_id(r[1], line, "to bus")?);
        if r[10] <= 0.0 {
            log::warn!("line {line}: skipping out-of-service branch {from_bus}-{to_bus}");
            continue;
        }
        if r[9] != 0.0 {
            return Err(syntax(line, "phase-shifting transformers are not supported"));
        }
        let is_transformer = r[8] != 0.0;
        branch_rows.insert(k + 1, branches.len());
        branches.push(Branch {
            from_bus,
            to_bus,
            r: r[2],
            x: r[3],
            b_charging: r[4],
            s_max: r[5],
            rate_b: r[6],
            rate_c: r[7],
            tap_ratio: if is_transformer { r[8] } else { 1.0 },
            is_transformer,
            tap_control: None,
            ang_min: r.get(11).copied().unwrap_or(-360.0),
            ang_max: r.get(12).copied().unwrap_or(360.0),
        });
    }

    match raw.matrices.remove("tap_ctrl") {
        Some(m) => {
            require_columns("tap_ctrl", &m, 5)?;
            for (line, r) in &m.rows {
                let row = as_id(r[0], *line, "branch row")? as usize;
                let idx = *branch_rows
                    .get(&row)
                    .ok_or_else(|| syntax(*line, format!("`mpc.tap_ctrl` refers to missing branch row {row}")))?;
                let br = &mut branches[idx];
                if (as_id(r[1], *line, "from bus")?, as_id(r[2], *line, "to bus")?) != (br.from_bus, br.to_bus) {
                    return Err(syntax(
                        *line,
                        format!("`mpc.tap_ctrl` buses do not match branch row {row}"),
                    ));
                }
                if !br.is_transformer {
                    return Err(syntax(*line, format!("branch row {row} is not a transformer")));
                }
                if br.tap_control.is_some() {
                    return Err(syntax(*line, format!("branch row {row} listed twice")));
                }
                if r[3] > r[4] {
                    return Err(syntax(*line, "Tmin exceeds Tmax"));
                }
                br.tap_control = Some(TapRange { min: r[3], max: r[4] });
            }
        }
        None => {
            for br in branches.iter_mut().filter(|b| b.is_transformer) {
                br.tap_control = Some(TapRange {
                    min: br.tap_ratio.min(0.9),
                    max: br.tap_ratio.max(1.1),
                });
            }
        }
    }

    let mut shunts = Vec::new();
    if let Some(m) = raw.matrices.remove("shunt_ctrl") {
        require_columns("shunt_ctrl", &m, 3)?;
        for (line, r) in &m.rows {
            shunts.push(ShuntCompensator {
                bus: as_id(r[0], *line, "compensator bus")?,
                q_min: r[1],
                q_max: r[2],
                q_init: r.get(3).copied().unwrap_or(r[1]),
            });
        }
    }

    let name = raw.name.unwrap_or_else(|| "case".to_string());
    NetworkCase::new(name, base_mva, buses, branches, generators, shunts)
}
