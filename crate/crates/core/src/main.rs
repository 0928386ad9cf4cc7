use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hjnet::analysis::DtRule;
use hjnet::scenario::{bundled_names, load_scenario, ReferenceSpec, RunOverrides};

/// Semi-Lagrangian Hamilton-Jacobi solver on networks.
#[derive(Debug, Parser)]
#[command(name = "hjnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run(RunArgs),
    /// List the bundled scenarios.
    List,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Path to a scenario JSON file, or a bundled scenario name.
    scenario: String,
    /// Space step Δx (the first rung in ladder mode).
    #[arg(long)]
    dx: Option<f64>,
    /// half_dx, power or power:C:p.
    #[arg(long = "dt-rule")]
    dt_rule: Option<DtRule>,
    /// Final time.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Directory for the artifacts.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Also write every time level, the controls and the vertex branches.
    #[arg(long = "emit-steps")]
    emit_steps: bool,
    /// Run a convergence ladder with this many rungs.
    #[arg(long)]
    ladder: Option<usize>,
    /// exact or fine:<dx>.
    #[arg(long)]
    reference: Option<ReferenceSpec>,
    /// Check the a-priori bounds and fail when one is violated.
    #[arg(long = "check-invariants")]
    check_invariants: bool,
}

fn configure_threads() -> Result<(), String> {
    let Ok(text) = std::env::var("HJNET_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .parse()
        .map_err(|_| format!("HJNET_THREADS must be a positive integer, got `{text}`"))?;
    if n == 0 {
        return Err("HJNET_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(args: RunArgs) -> Result<(), hjnet::Error> {
    let overrides = RunOverrides {
        dx: args.dx,
        dt_rule: args.dt_rule,
        horizon: args.horizon,
        out_dir: args.out_dir,
        emit_steps: args.emit_steps,
        ladder: args.ladder,
        reference: args.reference,
        check_invariants: args.check_invariants,
    };
    let scenario = load_scenario(&args.scenario)?.with_overrides(&overrides)?;
    let outcome = scenario.run()?;
    let meta = &outcome.metadata;
    if let Some(single) = &meta.single {
        println!(
            "{}: dx = {}, dt = {}, {} steps, courant = {:.3}, {:.3} s",
            meta.scenario, single.dx, single.dt, single.n_steps, single.courant, single.runtime_seconds
        );
        if let Some(e) = &single.errors {
            println!("E_inf = {:.3e}, E_1 = {:.3e}", e.e_inf, e.e_1);
        }
    }
    if let Some(table) = &meta.ladder {
        println!("{:>10} {:>10} {:>11} {:>6} {:>11} {:>6}", "dx", "dt", "E_inf", "rate", "E_1", "rate");
        for row in &table.rows {
            let r = &row.report;
            println!(
                "{:>10.4e} {:>10.4e} {:>11.3e} {:>6.2} {:>11.3e} {:>6.2}",
                r.dx, r.dt, r.e_inf, row.rate_inf, r.e_1, row.rate_1
            );
        }
    }
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    match cli.command {
        Command::List => {
            for name in bundled_names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
