//! `nlslab` command-line front end: configuration, dispatch and artifacts.
//!
//! Each run writes `<command>.json` (effective config, checks, warnings and
//! the report) and `<command>.csv` into the output directory. Exit codes:
//! 0 success, 1 usage error, 2 numerical failure, 3 a checked property failed.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use output::{Check, Csv, Outcome};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "NLSLAB_OUT";
pub const DEFAULT_OUT: &str = "nlslab-out";

#[derive(Debug, Parser)]
#[command(name = "nlslab", version, about = "Nonlinear Schrodinger experiments with random data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $NLSLAB_OUT or ./nlslab-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat JSON configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Basis, transform and propagator invariants.
    Selftest,
    /// Draw an ensemble and compare per-mode moments with the law.
    Sample,
    /// Evolve one initial datum in the harmonic or flat picture.
    Evolve,
    /// Decay exponent of the flat L^(p+1) norm for random data.
    Decay,
    /// Scattering profile and its Cauchy residuals.
    Scatter,
    /// Dispersive estimate ratio for the free flow.
    Dispersion,
    /// Localized Sobolev decay of the free flow.
    LocalizedDecay,
    /// Weighted-measure monotonicity inequality.
    Monotonicity,
    /// Equivalence or singularity of two diagonal Gaussian laws.
    Equivalence,
    /// Large-deviation tail of the smoothed sup norm.
    Tails,
    /// Radon-Nikodym density of two discrete measures.
    RnDiscrete,
    /// Brute-force power inequality between two discrete measures.
    PowerScan,
    /// Time-step budget of the globalisation argument.
    Bourgain,
    /// Liouville and recurrence checks on planar toy systems.
    Classical,
    /// Growth of a weak norm along the harmonic flow.
    NormGrowth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Selftest => "selftest",
            Command::Sample => "sample",
            Command::Evolve => "evolve",
            Command::Decay => "decay",
            Command::Scatter => "scatter",
            Command::Dispersion => "dispersion",
            Command::LocalizedDecay => "localized-decay",
            Command::Monotonicity => "monotonicity",
            Command::Equivalence => "equivalence",
            Command::Tails => "tails",
            Command::RnDiscrete => "rn-discrete",
            Command::PowerScan => "power-scan",
            Command::Bourgain => "bourgain",
            Command::Classical => "classical",
            Command::NormGrowth => "norm-growth",
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(cli) {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("nlslab: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), &cli.overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let command = cli.command;
    let outcome = pool.install(|| commands::execute(command, &cfg))?;
    let summary = outcome.summary(command.name(), &cfg);
    let dir = out_dir(cli.out);
    let written = output::write_artifacts(&dir, command.name(), &summary, &outcome)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for c in &outcome.checks {
        println!("{} {}: {:?} (threshold {:?})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(outcome.passed())
}
