//! Batch front end: parse a config, run one experiment, emit JSON and CSV reports.

pub mod commands;
pub mod config;
pub mod error;

use std::path::Path;

use bergman_lab::io::write_atomic;
use bergman_lab::LabError;
use serde::Serialize;
use serde_json::Value;

pub use config::{resolve, ExperimentConfig, Resolved};
pub use error::{CliError, CliResult};

use commands::{Context, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Kernel,
    Toeplitz,
    Berezin,
    Rkt,
    Essnorm,
    Rf,
    Schur,
    Covering,
    Localize,
    Rank1,
    VerifyAxioms,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Kernel,
        Command::Toeplitz,
        Command::Berezin,
        Command::Rkt,
        Command::Essnorm,
        Command::Rf,
        Command::Schur,
        Command::Covering,
        Command::Localize,
        Command::Rank1,
        Command::VerifyAxioms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Toeplitz => "toeplitz",
            Command::Berezin => "berezin",
            Command::Rkt => "rkt",
            Command::Essnorm => "essnorm",
            Command::Rf => "rf",
            Command::Schur => "schur",
            Command::Covering => "covering",
            Command::Localize => "localize",
            Command::Rank1 => "rank1",
            Command::VerifyAxioms => "verify-axioms",
        }
    }
}

/// Overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub resolution_scale: Option<f64>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    anchor: &'static str,
    seed: u64,
    resolution_scale: f64,
    passed: Option<bool>,
    config: &'a Value,
    result: &'a Value,
}

/// Serialised reports, ready to be written.
#[derive(Clone, Debug, PartialEq)]
pub struct Reports {
    pub json: Vec<u8>,
    pub csv: Vec<u8>,
    pub passed: Option<bool>,
}

/// Parses `config_text`, validates it completely, then runs `cmd`.
/// Relative paths in the config are taken from `base`.
pub fn run(cmd: Command, config_text: &str, base: &Path, opts: &RunOptions) -> CliResult<Reports> {
    let cfg = ExperimentConfig::parse(config_text)?;
    let echo: Value = serde_json::from_str(config_text).map_err(LabError::from)?;
    let resolved = resolve(&cfg, base)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let scale = opts.resolution_scale.or(cfg.resolution_scale).unwrap_or(1.0);
    if !scale.is_finite() || scale <= 0.0 || scale > 16.0 {
        return Err(CliError::Config(format!("resolution scale {scale} must lie in (0, 16]")));
    }
    let ctx = Context { cfg: &cfg, resolved: &resolved, seed, scale, base };
    let out: Outcome = match cmd {
        Command::Kernel => commands::kernel(&ctx),
        Command::Toeplitz => commands::toeplitz(&ctx),
        Command::Berezin => commands::berezin(&ctx),
        Command::Rkt => commands::rkt(&ctx),
        Command::Essnorm => commands::essnorm(&ctx),
        Command::Rf => commands::rf(&ctx),
        Command::Schur => commands::schur(&ctx),
        Command::Covering => commands::covering(&ctx),
        Command::Localize => commands::localize(&ctx),
        Command::Rank1 => commands::rank1(&ctx),
        Command::VerifyAxioms => commands::verify_axioms_cmd(&ctx),
    }?;
    let doc = ReportDoc {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        anchor: out.anchor,
        seed,
        resolution_scale: scale,
        passed: out.passed,
        config: &echo,
        result: &out.result,
    };
    let mut json = serde_json::to_vec_pretty(&doc).map_err(LabError::from)?;
    json.push(b'\n');
    Ok(Reports { json, csv: out.table.to_csv()?, passed: out.passed })
}

/// Writes `<out>/<command>.json` and `<out>/<command>.csv`, each atomically.
pub fn write_reports(out: &Path, cmd: Command, r: &Reports) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(LabError::from)?;
    write_atomic(&out.join(format!("{}.json", cmd.name())), &r.json)?;
    write_atomic(&out.join(format!("{}.csv", cmd.name())), &r.csv)?;
    Ok(())
}
