use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{BenchError, ExperimentSpec, RunReport};
use crate::orpd::ObjectiveKind;

pub const SUMMARY_HEADER: &str = "algorithm,case,objective,best,worst,mean,std,psave_pct";

fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_csv(report: &RunReport) -> String {
    let s = &report.summary;
    let header: Vec<String> = SUMMARY_HEADER.split(',').map(String::from).collect();
    let row = vec![
        report.algorithm.clone(),
        report.case_name.clone(),
        report.objective.key().to_string(),
        s.best.to_string(),
        s.worst.to_string(),
        s.mean.to_string(),
        s.std.to_string(),
        opt(report.psave_percent),
    ];
    csv_text(&header, &[row])
}

fn runs_csv(report: &RunReport) -> String {
    let mut header: Vec<String> = [
        "run",
        "objective",
        "fitness",
        "feasible",
        "penalty_v",
        "penalty_q",
        "penalty_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(report.labels.iter().cloned());
    let rows: Vec<Vec<String>> = report
        .runs
        .iter()
        .map(|r| {
            let b = &r.breakdown;
            let mut row = vec![
                r.run_index.to_string(),
                r.best_objective.to_string(),
                r.best_fitness.to_string(),
                b.feasible.to_string(),
                b.penalty_v.to_string(),
                b.penalty_q.to_string(),
                b.penalty_s.to_string(),
            ];
            row.extend(b.controls.to_flat().iter().map(|x| x.to_string()));
            row
        })
        .collect();
    csv_text(&header, &rows)
}

fn convergence_csv(records: &[crate::bbbat::IterationRecord]) -> String {
    let header = vec!["iteration".to_string(), "best_fitness".into(), "lambda".into()];
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.best_fitness.to_string(),
                r.lambda_value.to_string(),
            ]
        })
        .collect();
    csv_text(&header, &rows)
}

fn summary_json(report: &RunReport, spec: &ExperimentSpec) -> String {
    let best = report.best_run();
    let controls: serde_json::Map<String, serde_json::Value> = report
        .labels
        .iter()
        .cloned()
        .zip(
            best.breakdown
                .controls
                .to_flat()
                .into_iter()
                .map(serde_json::Value::from),
        )
        .collect();
    let runs: Vec<_> = report
        .runs
        .iter()
        .map(|r| {
            json!({
                "run": r.run_index,
                "objective": r.best_objective,
                "fitness": r.best_fitness,
                "feasible": r.breakdown.feasible,
            })
        })
        .collect();
    let value = json!({
        "algorithm": report.algorithm,
        "case": report.case_name,
        "objective": report.objective.key(),
        "runs": spec.runs,
        "population": spec.population,
        "iterations": spec.iterations,
        "master_seed": spec.master_seed,
        "penalty": spec.penalty,
        "pulse_time_dependent": spec.pulse_time_dependent,
        "velocity_sign": spec.velocity_sign.key(),
        "std_kind": spec.std_kind,
        "best": report.summary.best,
        "worst": report.summary.worst,
        "mean": report.summary.mean,
        "std": report.summary.std,
        "psave_pct": report.psave_percent,
        "tvd_improve_pct": report.tvd_improve_percent,
        "base": report.base,
        "best_run": best.run_index,
        "best_fitness": best.best_fitness,
        "best_metrics": report.best_metrics,
        "best_controls": controls,
        "per_run": runs,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("serializable report");
    text.push('\n');
    text
}

/// The best control vector next to the base case, grouped like the usual
/// "optimal settings" tables.
pub fn control_table(report: &RunReport) -> String {
    let best = report.best_run();
    let base = report.base_controls.to_flat();
    let found = best.breakdown.controls.to_flat();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Optimal settings of control variables: {}, objective {}, {} (best of {} runs: run {})",
        report.case_name,
        report.objective.key(),
        report.algorithm,
        report.runs.len(),
        best.run_index
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<24}{:>14}{:>14}", "Variable", "Base case", report.algorithm);
    let groups = [
        ("V_G", "Generator voltage (p.u.)"),
        ("T_", "Transformer tap ratio (p.u.)"),
        ("Q_C", "Capacitor banks (p.u.)"),
    ];
    for (prefix, title) in groups {
        let rows: Vec<usize> = (0..report.labels.len())
            .filter(|&k| report.labels[k].starts_with(prefix))
            .collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for k in rows {
            let _ = writeln!(out, "{:<24}{:>14.6}{:>14.6}", report.labels[k], base[k], found[k]);
        }
    }
    let metric = |name: &str, base: f64, best: Option<f64>| {
        let best = best
            .map(|v| format!("{v:>14.6}"))
            .unwrap_or_else(|| format!("{:>14}", "-"));
        format!("{name:<24}{base:>14.6}{best}\n")
    };
    let m = report.best_metrics;
    out.push_str(&metric("P_loss (MW)", report.base.p_loss, m.map(|m| m.p_loss)));
    out.push_str(&metric("Q_loss (MVAr)", report.base.q_loss, m.map(|m| m.q_loss)));
    out.push_str(&metric("TVD (p.u.)", report.base.tvd, m.map(|m| m.tvd)));
    out.push_str(&metric("L-index", report.base.lindex, m.map(|m| m.lindex)));
    if report.objective != ObjectiveKind::ActiveLoss || !best.breakdown.feasible {
        let _ = writeln!(out, "{:<24}{:>14}{:>14.6}", "Penalised fitness", "", best.best_fitness);
    }
    out
}

/// Writes `summary.csv`, `summary.json`, `runs.csv`, `controls.txt` and one
/// `convergence/run_NNN.csv` per run into `spec.output_dir`.
pub fn emit_reports(report: &RunReport, spec: &ExperimentSpec) -> Result<Vec<PathBuf>, BenchError> {
    let dir = &spec.output_dir;
    let conv = dir.join("convergence");
    fs::create_dir_all(&conv).map_err(|e| BenchError::io(&conv, e))?;

    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<(), BenchError> {
        write_file(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("summary.csv"), summary_csv(report))?;
    put(dir.join("summary.json"), summary_json(report, spec))?;
    put(dir.join("runs.csv"), runs_csv(report))?;
    put(dir.join("controls.txt"), control_table(report))?;
    for run in &report.runs {
        put(
            conv.join(format!("run_{:03}.csv", run.run_index)),
            convergence_csv(&run.records),
        )?;
    }
    Ok(written)
}
