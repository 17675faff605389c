use std::fmt::Write;

use super::NetworkCase;

/// Serialises a case in the layout accepted by [`parse_case`](super::parse_case).
///
/// The dispatch blocks (`gen_vlim`, `tap_ctrl`, `shunt_ctrl`) are always
/// written so that re-parsing reproduces the same control space.
pub fn write_case(case: &NetworkCase) -> String {
    let mut out = String::new();
    let base = case.base_mva();
    // fmt::Write on a String cannot fail
    let _ = write_all(&mut out, case, base);
    out
}

fn write_all(out: &mut String, case: &NetworkCase, base: f64) -> std::fmt::Result {
    writeln!(out, "function mpc = {}", case.name())?;
    writeln!(out, "mpc.version = '2';")?;
    writeln!(out, "mpc.baseMVA = {base};")?;
    writeln!(out)?;
    writeln!(
        out,
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin"
    )?;
    writeln!(out, "mpc.bus = [")?;
    for b in case.buses() {
        writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{};",
            b.id,
            b.kind.matpower_code(),
            b.p_demand,
            b.q_demand,
            b.base_shunt_g * base,
            b.base_shunt_b * base,
            b.area,
            b.v_init,
            b.angle_init,
            b.base_kv,
            b.zone,
            b.v_max,
            b.v_min
        )?;
    }
    writeln!(out, "];")?;
    writeln!(out)?;
    writeln!(out, "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")?;
    writeln!(out, "mpc.gen = [")?;
    for g in case.generators() {
        writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t{};",
            g.bus, g.p_set, g.q_init, g.q_max, g.q_min, g.v_set, g.m_base, g.p_max, g.p_min
        )?;
    }
    writeln!(out, "];")?;
    writeln!(out)?;
    writeln!(
        out,
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax"
    )?;
    writeln!(out, "mpc.branch = [")?;
    for br in case.branches() {
        let ratio = if br.is_transformer { br.tap_ratio } else { 0.0 };
        writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t0\t1\t{}\t{};",
            br.from_bus,
            br.to_bus,
            br.r,
            br.x,
            br.b_charging,
            br.s_max,
            br.rate_b,
            br.rate_c,
            ratio,
            br.ang_min,
            br.ang_max
        )?;
    }
    writeln!(out, "];")?;
    writeln!(out)?;
    writeln!(out, "%\tbus\tVmin\tVmax")?;
    writeln!(out, "mpc.gen_vlim = [")?;
    for g in case.generators() {
        writeln!(out, "\t{}\t{}\t{};", g.bus, g.v_min, g.v_max)?;
    }
    writeln!(out, "];")?;
    writeln!(out)?;
    writeln!(out, "%\tbranch\tfbus\ttbus\tTmin\tTmax")?;
    writeln!(out, "mpc.tap_ctrl = [")?;
    for (k, br) in case.branches().iter().enumerate() {
        if let Some(range) = br.tap_control {
            writeln!(
                out,
                "\t{}\t{}\t{}\t{}\t{};",
                k + 1,
                br.from_bus,
                br.to_bus,
                range.min,
                range.max
            )?;
        }
    }
    writeln!(out, "];")?;
    writeln!(out)?;
    writeln!(out, "%\tbus\tQmin\tQmax\tQinit")?;
    writeln!(out, "mpc.shunt_ctrl = [")?;
    for sh in case.shunts() {
        writeln!(out, "\t{}\t{}\t{}\t{};", sh.bus, sh.q_min, sh.q_max, sh.q_init)?;
    }
    writeln!(out, "];")?;
    Ok(())
}
