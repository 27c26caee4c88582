mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Takiff algebra invariants, Kostant sections and hyperbolic Toda lattices.
#[derive(Debug, Parser)]
#[command(name = "takiff-toda", version)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized data (overrides the environment and the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn parse(argv: &[OsString]) -> Result<Cli, clap::Error> {
    let cli = Cli::try_parse_from(argv)?;
    Ok(cli)
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let mut cli = match parse(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if cli.command.is_none() {
        let name = cfg
            .command
            .clone()
            .ok_or_else(|| CliError::Usage("no subcommand given (see --help)".into()))?;
        let mut with_cmd = argv.clone();
        with_cmd.push(name.into());
        cli = parse(&with_cmd).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let seed = cfg.resolve_seed(cli.seed)?;
    match cli.command.as_ref().expect("subcommand resolved") {
        Command::Simulate(a) => commands::simulate(a, &cfg, seed),
        Command::Invariants(a) => commands::invariants(a, &cfg, seed),
        Command::Reduce(a) => commands::reduce(a, &cfg),
        Command::Series(a) => commands::series(a, &cfg),
        Command::Check(a) => commands::check(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
