use std::path::PathBuf;
use std::process::ExitCode;

use bergman_lab_cli::{run, write_reports, CliError, Command, RunOptions};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "bergman-lab", version, about = "Toeplitz, Berezin and Schur diagnostics on Bergman-type spaces")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON and CSV reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Multiplies quadrature orders.
    #[arg(long)]
    resolution_scale: Option<f64>,
}

fn execute(args: &Args) -> Result<Option<bool>, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(bergman_lab::LabError::from)?;
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let opts = RunOptions { seed: args.seed, resolution_scale: args.resolution_scale };
    let reports = run(args.command, &text, &base, &opts)?;
    write_reports(&args.out, args.command, &reports)?;
    Ok(reports.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(Some(false)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report(args.command.name());
            eprintln!("{}", serde_json::to_string_pretty(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(2)
        }
    }
}
