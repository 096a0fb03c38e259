//! Command line front end for taskagg.
//!
//! `taskagg <command>` reads a result table (or a bundled fixture), runs
//! one analysis and writes markdown, CSV, JSON and SVG files to the output
//! directory. Exit codes: 0 success, 1 usage, 2 data validation,
//! 3 computation failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::CommandOutput;
pub use config::RunConfig;
pub use error::{exit, CliError};

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs `command` with `config` on a pool of `config.threads` workers.
pub fn execute(command: &Command, config: &RunConfig) -> Result<CommandOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Computation(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Ingest { .. } => commands::ingest::run(config),
        Command::Bootstrap { .. } => commands::bootstrap::run(config),
        Command::Bhm { .. } => commands::bhm::run(config),
        Command::Ranks { source, .. } => commands::ranks::run(config, *source),
        Command::Simplex { .. } => commands::simplex::run(config),
        Command::Report { .. } => commands::report::run(config),
        Command::Simstudy { .. } => commands::simstudy::run(config),
    })
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: exit::SUCCESS, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: exit::USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let result = cli.resolve().and_then(|config| execute(&cli.command, &config));
    match result {
        Ok(out) => Outcome {
            code: if out.failed { exit::COMPUTATION } else { exit::SUCCESS },
            stdout: out.text,
            stderr: String::new(),
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}
