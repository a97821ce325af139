//! Command-line scenario runner.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on a usage
//! or configuration error.

pub mod config;
pub mod report;
mod scenarios;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ScenarioConfig;
pub use report::{Check, Meta, ScenarioReport};
pub use scenarios::{run_example, run_flow, run_reduce2d, run_verify};

use crate::error::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "higgs-workbench", version, about = "Property suites, curvature functionals, flows and Hitchin-equation checks on flat tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign, involution, inner-product and trace property suites.
    Verify(Common),
    /// Descent of the metric with the Higgs field fixed; writes a CSV trace.
    Flow(Common),
    /// Hitchin-equation formulations on a seeded SU(2) configuration.
    Reduce2d(Common),
    /// Higgs-bundle examples and their Higgs-field checks.
    Example(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for report.json, meta.json and trace.csv; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the scenario and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, common) = match &cli.command {
        Command::Verify(c) => ("verify", c),
        Command::Flow(c) => ("flow", c),
        Command::Reduce2d(c) => ("reduce2d", c),
        Command::Example(c) => ("example", c),
    };
    let mut cfg = match ScenarioConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    let result = match name {
        "verify" => run_verify(&cfg),
        "flow" => run_flow(&cfg),
        "reduce2d" => run_reduce2d(&cfg),
        _ => run_example(&cfg),
    };
    let report = match result {
        Ok(r) => r,
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidChart(_)) | Err(e @ Error::BandTooLarge { .. }) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    let out = common.out.clone().or_else(|| cfg.out_dir.clone());
    let written = match &out {
        Some(dir) => report.write_to(dir, &Meta::now(&common.config)),
        None => report.to_json().map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: {:.3e} > {:.3e}", c.name, c.value, c.tolerance);
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
