#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

mod commands;
mod config;
mod svg;

use config::RunConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Other(anyhow::Error),
}

impl From<wickledger::Error> for CliError {
    fn from(e: wickledger::Error) -> Self {
        match e {
            wickledger::Error::Io(_) | wickledger::Error::Json(_) => CliError::Other(e.into()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

/// What a command produced; written to disk by `main`.
pub struct CommandOutput {
    pub params: Value,
    pub results: Value,
    pub files: Vec<(String, String)>,
    pub svgs: Vec<(String, String)>,
    /// Numerical contracts that failed; non-empty means exit code 3.
    pub violations: Vec<String>,
}

#[derive(Parser)]
#[command(name = "wickledger", version, about = "Lorentzian/Euclidean information ledger experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory [default: wickledger-out/<command>]
    #[arg(long, global = true, value_name = "DIR", env = "WICKLEDGER_OUT")]
    out: Option<PathBuf>,
    /// Write JSON and CSV only, no SVG
    #[arg(long, global = true)]
    json: bool,
    /// Override a config key
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Free Schrödinger evolution of a Gaussian packet
    Evolve,
    /// Real-time kernel continued to imaginary time vs heat kernel
    Wick,
    /// Brownian path ensemble, Euclidean action and information
    Paths,
    /// Measurement schedule with Euclidean duals
    Ledger,
    /// MERA network entropy and minimal cuts
    Mera,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Wick => "wick",
            Command::Paths => "paths",
            Command::Ledger => "ledger",
            Command::Mera => "mera",
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    params: &'a Value,
    results: &'a Value,
    violations: &'a [String],
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    created_unix: u64,
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get("seed", 0u64)?,
    };
    let name = cli.command.name();
    let output = match cli.command {
        Command::Evolve => commands::evolve::run(&cfg)?,
        Command::Wick => commands::wick::run(&cfg)?,
        Command::Paths => commands::paths::run(&cfg, seed)?,
        Command::Ledger => commands::ledger::run(&cfg, seed)?,
        Command::Mera => commands::mera::run(&cfg, seed)?,
    };
    cfg.reject_unused()?;

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("wickledger-out").join(name));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        command: name,
        seed,
        params: &output.params,
        results: &output.results,
        violations: &output.violations,
    };
    write(&dir, "report.json", &(serde_json::to_string_pretty(&report).context("serialising report")? + "\n"))?;
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Metadata { command: name, version: env!("CARGO_PKG_VERSION"), created_unix };
    write(&dir, "metadata.json", &(serde_json::to_string_pretty(&meta).context("serialising metadata")? + "\n"))?;
    for (file, contents) in &output.files {
        write(&dir, file, contents)?;
    }
    if !cli.json {
        for (file, contents) in &output.svgs {
            write(&dir, file, contents)?;
        }
    }
    println!("{name}: wrote {}", dir.join("report.json").display());
    for v in &output.violations {
        eprintln!("contract violation: {v}");
    }
    Ok(output.violations.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
