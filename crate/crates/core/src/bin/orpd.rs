use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orpd_core::bbbat::Variant;
use orpd_core::bench::{self, BenchError, CaseSource, ExperimentSpec};
use orpd_core::orpd::{ObjectiveKind, PenaltyConfig};

const OUT_DIR_ENV: &str = "ORPD_OUT_DIR";

const EXIT_USAGE: u8 = 1;
const EXIT_CASE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "orpd",
    version,
    about = "Optimal reactive power dispatch with bat-algorithm variants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a multi-seed optimisation campaign and write reports.
    Run(RunArgs),
    /// Print the base-case power-flow summary of a network.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// ieee14, ieee57, ieee118 or a path to a MATPOWER case file.
    #[arg(long)]
    case: Option<String>,
    /// ploss, tvd or lindex.
    #[arg(long)]
    objective: Option<String>,
    /// ba, gbbba or degbbba.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    /// Defaults to 100, 200 or 300 for the 14-, 57- and 118-bus cases.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides ORPD_OUT_DIR and the config file).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "lambda-v")]
    lambda_v: Option<f64>,
    #[arg(long = "lambda-q")]
    lambda_q: Option<f64>,
    #[arg(long = "lambda-s")]
    lambda_s: Option<f64>,
    /// Pulse rate R0 (1 - exp(-gamma t)) instead of R0 (1 - exp(-gamma)).
    #[arg(long)]
    pulse_time_dependent: bool,
    /// paper or conventional.
    #[arg(long = "velocity-sign")]
    velocity_sign: Option<String>,
    /// population or sample.
    #[arg(long)]
    std: Option<String>,
    /// Number of runs executed concurrently.
    #[arg(long)]
    workers: Option<usize>,
    /// key=value file with any of the settings above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long)]
    case: String,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

fn exit_code(err: &BenchError) -> u8 {
    match err {
        BenchError::Io { .. } => EXIT_IO,
        _ => EXIT_CASE,
    }
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec, (u8, String)> {
    let mut spec = ExperimentSpec::new(
        CaseSource::Embedded(orpd_core::netmodel::EmbeddedCase::Ieee14),
        ObjectiveKind::ActiveLoss,
        Variant::Degbbba,
    );
    let mut config_iters = None;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| (EXIT_IO, format!("{}: {e}", path.display())))?;
        let settings = bench::parse_config(&text).map_err(|e| (EXIT_USAGE, format!("{}: {e}", path.display())))?;
        spec.apply_settings(&settings).map_err(|e| (EXIT_CASE, e.to_string()))?;
        config_iters = settings.get("iters").cloned();
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            spec.output_dir = PathBuf::from(dir);
        }
    }

    let mut flags = std::collections::BTreeMap::new();
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.insert(k.to_string(), v);
        }
    };
    set("case", args.case.clone());
    set("objective", args.objective.clone());
    set("algo", args.algo.clone());
    set("runs", args.runs.map(|v| v.to_string()));
    set("pop", args.pop.map(|v| v.to_string()));
    set("iters", args.iters.map(|v| v.to_string()).or(config_iters));
    set("seed", args.seed.map(|v| v.to_string()));
    set("lambda_v", args.lambda_v.map(|v| v.to_string()));
    set("lambda_q", args.lambda_q.map(|v| v.to_string()));
    set("lambda_s", args.lambda_s.map(|v| v.to_string()));
    set("velocity_sign", args.velocity_sign.clone());
    set("std", args.std.clone());
    set("workers", args.workers.map(|v| v.to_string()));
    if args.pulse_time_dependent {
        set("pulse_time_dependent", Some("true".into()));
    }
    spec.apply_settings(&flags).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    if let Some(out) = &args.out {
        spec.output_dir = out.clone();
    }
    Ok(spec)
}

fn cmd_run(args: &RunArgs) -> Result<(), (u8, String)> {
    let spec = build_spec(args)?;
    let report = bench::run_experiment(&spec).map_err(|e| (exit_code(&e), e.to_string()))?;
    let s = &report.summary;
    let unit = report.objective.unit();
    println!(
        "{} {} {}: best {:.6} {unit}, worst {:.6}, mean {:.6}, std {:.6}",
        report.algorithm, report.case_name, report.objective, s.best, s.worst, s.mean, s.std
    );
    if let Some(p) = report.psave_percent {
        println!("loss saving {p:.3} % (base {:.4} MW)", report.base.p_loss);
    }
    if let Some(p) = report.tvd_improve_percent {
        println!(
            "voltage deviation improvement {p:.3} % (base {:.6} p.u.)",
            report.base.tvd
        );
    }
    println!("reports written to {}", spec.output_dir.display());
    Ok(())
}

fn cmd_baseline(args: &BaselineArgs) -> Result<(), (u8, String)> {
    let source: CaseSource = args.case.parse().expect("infallible");
    let case = source.load().map_err(|e| (exit_code(&e), e.to_string()))?;
    let metrics = bench::baseline(&case).map_err(|e| (exit_code(&e), e.to_string()))?;
    let summary = case.summary();
    let penalties = {
        let controls = orpd_core::orpd::ControlVector::base(&case);
        orpd_core::orpd::evaluate_controls(&case, controls, ObjectiveKind::ActiveLoss, &PenaltyConfig::default())
    };
    if args.json {
        let value = serde_json::json!({
            "summary": summary,
            "p_loss_mw": metrics.p_loss,
            "q_loss_mvar": metrics.q_loss,
            "tvd_pu": metrics.tvd,
            "lindex": metrics.lindex,
            "feasible": penalties.feasible,
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        return Ok(());
    }
    println!("case            {}", summary.name);
    println!(
        "buses {}  generators {}  load buses {}  branches {}  regulating transformers {}  compensators {}",
        summary.n_buses,
        summary.n_generators,
        summary.n_pq,
        summary.n_branches,
        summary.n_transformers,
        summary.n_shunts
    );
    println!("control variables {}", summary.dimension);
    println!(
        "demand          {:.2} MW, {:.2} MVAr",
        summary.total_p_demand, summary.total_q_demand
    );
    println!("P_loss          {:.4} MW", metrics.p_loss);
    println!("Q_loss          {:.4} MVAr", metrics.q_loss);
    println!("TVD             {:.6} p.u.", metrics.tvd);
    println!("L-index (max)   {:.6}", metrics.lindex);
    println!(
        "limits          {}",
        if penalties.feasible {
            "all satisfied".to_string()
        } else {
            format!(
                "violated (penalties V {:.4}, Q {:.4}, S {:.4} at default weights)",
                penalties.penalty_v, penalties.penalty_q, penalties.penalty_s
            )
        }
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Baseline(args) => cmd_baseline(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
