//! Command-line front end: argument parsing, configuration, exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use config::RunConfig;
use output::Output;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] digitfrac::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_guard() => EXIT_GUARD,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "digitfrac", version, about = "Missing-digit sets, weighted approximation and their dimensions")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON-lines output file; CSV series go next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `dim` reports the dimension for the unrestricted space instead.
    #[arg(long, global = true)]
    pub euclidean: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Closed-form dimension of the weighted approximation set.
    Dim,
    /// General dimension number over its candidate set.
    Mtp,
    /// Cover counts and truncated Hausdorff sums around the threshold.
    Cover,
    /// Box counts of the set and of single generations.
    Boxcount,
    /// Series conditions on the approximating function.
    Series,
    /// Runs every verification suite.
    Verify,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let mut out = Output::new(&cfg, cli.out.as_deref())?;
    let pass = pool.install(|| match cli.command {
        Command::Dim => commands::dim(&cfg, &mut out, cli.euclidean),
        Command::Mtp => commands::mtp(&cfg, &mut out),
        Command::Cover => commands::cover(&cfg, &mut out),
        Command::Boxcount => commands::boxcount(&cfg, &mut out),
        Command::Series => commands::series(&cfg, &mut out),
        Command::Verify => {
            let reports = verify::run_all(&cfg)?;
            let pass = reports.iter().all(|r| r.pass);
            if let Some(failed) = reports.iter().find(|r| !r.pass) {
                eprintln!(
                    "verification failed in {}: {}",
                    failed.name,
                    serde_json::to_string(&failed.counterexample).expect("counterexample serializes")
                );
            }
            out.record("verify", json!({ "pass": pass, "seed": cfg.seed, "suites": reports }))?;
            Ok(pass)
        }
    })?;
    out.finish()?;
    Ok(pass)
}
