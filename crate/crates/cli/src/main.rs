//! `qgeo` command-line interface.
//!
//! Exit codes: 0 success, 1 failed check, 2 configuration error, 3 numerical abort.

mod args;
mod commands;
mod error;
mod output;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn init_logging(quiet: bool, json: bool) {
    let mut builder = env_logger::Builder::new();
    builder.filter_level(if quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    });
    builder.parse_env("QGEO_LOG");
    if json {
        builder.format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().as_str(),
                "target": record.target(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    builder.target(env_logger::Target::Stderr).init();
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("QGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "QGEO_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match &cli.command {
        Command::Geometry(a) => commands::geometry(&cli.global, a),
        Command::Transport(a) => commands::transport(&cli.global, a),
        Command::Holonomy(a) => commands::holonomy(&cli.global, a),
        Command::Apt(a) => commands::apt(&cli.global, a),
        Command::Convergence(a) => commands::convergence(&cli.global, a),
        Command::Verify(a) => verify::run(&cli.global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_logging(cli.global.quiet, cli.global.json_logs);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
