//! `qcorr` command-line front end.
//!
//! Exit codes: 0 success (including optimizer non-convergence, reported as
//! `converged: false`), 1 verification failure or numerical breakdown, 2 usage error or
//! unreadable input, 3 capacity exceeded.

mod compute;
mod examples;
mod info;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcorr::Error;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qcorr", version, about = "Classical and quantum correlation measures of bipartite states")]
struct Cli {
    /// Worker threads for optimizer restarts and suite trials.
    #[arg(long, global = true, env = "QCORR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one measure on a state file and print the report as JSON.
    Compute(compute::ComputeArgs),
    /// Run a verification suite (or replay a dumped failure).
    Verify(verify::VerifyArgs),
    /// Write a named example state and its expected-values sidecar.
    Examples(examples::ExamplesArgs),
    /// Summarise a state file.
    Info(info::InfoArgs),
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::Numerical(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: msg.into() }
    }
}

pub type CmdResult = Result<ExitCode, Failure>;

pub fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Compute(args) => compute::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Examples(args) => examples::run(args),
        Command::Info(args) => info::run(args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
