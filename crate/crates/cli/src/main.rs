use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use log::LevelFilter;

use isospec_cli::config::Verb;
use isospec_cli::{execute, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "isospec", version, about = "Numerical checks for isospectral perturbations of correct restrictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory, overriding `output.dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment at a single grid size.
    Run { config: PathBuf },
    /// Run one experiment over `n_list` and write a convergence table.
    Sweep { config: PathBuf },
}

fn log_level() -> Result<LevelFilter> {
    match std::env::var("ISOSPEC_LOG") {
        Err(std::env::VarError::NotPresent) => Ok(LevelFilter::Warn),
        Ok(v) => match v.as_str() {
            "quiet" => Ok(LevelFilter::Error),
            "info" => Ok(LevelFilter::Info),
            "debug" => Ok(LevelFilter::Debug),
            other => bail!("ISOSPEC_LOG must be quiet, info or debug, got {other:?}"),
        },
        Err(e) => bail!("ISOSPEC_LOG: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { 0 });
        }
    };
    let level = match log_level() {
        Ok(level) => level,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    let (verb, config) = match cli.command {
        Command::Run { config } => (Verb::Run, config),
        Command::Sweep { config } => (Verb::Sweep, config),
    };
    ExitCode::from(execute(verb, &config, cli.out) as u8)
}
