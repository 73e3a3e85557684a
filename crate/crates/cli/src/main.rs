//! `renyi-lab`: command-line front end for `renyi-core`.
//!
//! Exit status: 0 on success, 1 on usage or validation errors, 2 when a
//! constraint verification fails (the report is still written).

mod args;
mod commands;
mod config;
mod inputs;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Format};
use renyi_core::ExecPolicy;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;

fn main() -> ExitCode {
    renyi_core::exec::init_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            let unreachable = matches!(e.downcast_ref::<renyi_core::Error>(), Some(renyi_core::Error::TargetUnreachable { .. }));
            ExitCode::from(if unreachable { EXIT_VERIFICATION } else { EXIT_USAGE })
        }
    }
}

/// Flags given on the command line win over those in a `--config` manifest.
fn resolve(cli: Cli) -> Result<Cli> {
    let Some(path) = &cli.config else { return Ok(cli) };
    if cli.command.is_some() {
        anyhow::bail!("--config replaces the subcommand; give one or the other");
    }
    let argv = config::expand(path)?;
    let from_file = Cli::try_parse_from(&argv).with_context(|| format!("config {} expands to invalid arguments", path.display()))?;
    Ok(Cli {
        config: None,
        output: cli.output.or(from_file.output),
        format: cli.format.or(from_file.format),
        seed: cli.seed.or(from_file.seed),
        command: from_file.command,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let cli = resolve(cli)?;
    let Some(command) = cli.command else {
        anyhow::bail!("no subcommand given (see --help)");
    };
    let ctx = commands::Ctx { seed: cli.seed.unwrap_or(0), format: cli.format.unwrap_or(Format::Json), policy: ExecPolicy::default() };
    let report = commands::run(command, &ctx)?;
    match &cli.output {
        Some(path) => std::fs::write(path, &report.body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(report.body.as_bytes())?,
    }
    Ok(report.ok)
}
