mod cli;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::config::{ConfigFile, Overrides, Settings, THREADS_VAR};
use crate::error::{CliError, CliResult};

/// Exit status when a check exceeds its tolerance.
const TOLERANCE_FAILURE: u8 = 4;

fn overrides(cli: &Cli) -> Overrides {
    let mut o = Overrides {
        format: cli.format,
        ..Default::default()
    };
    match &cli.command {
        Command::Energy(a) => {
            o.charge = a.state.z;
            o.method = a.method;
        }
        Command::Spectrum(a) => {
            o.charge = a.z;
            o.method = a.method;
        }
        Command::Floquet(a) => {
            o.charge = a.z;
            o.half_width = a.half_width;
        }
        Command::Wavefunction(a) => o.charge = a.state.z,
        Command::Quasipoly(a) => o.charge = a.z,
        Command::Validate(a) => o.charge = a.z,
        Command::Tables(_) => {}
    }
    o
}

fn run(cli: &Cli) -> CliResult<bool> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let env = std::env::var(THREADS_VAR).ok();
    let settings = Settings::resolve(&file, overrides(cli), env.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = settings.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", settings.threads.unwrap_or(0))))?;
    let out = pool.install(|| commands::run(&cli.command, &settings))?;
    output::write_to(&out.render(settings.format)?, cli.output.as_deref())?;
    for f in &out.failures {
        eprintln!("tolerance exceeded: {f}");
    }
    Ok(out.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(TOLERANCE_FAILURE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
