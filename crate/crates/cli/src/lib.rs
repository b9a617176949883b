//! Command-line front end: configuration, the `currents`, `verify`, `scan`
//! and `oracle` commands, and their JSON or CSV output.
//!
//! Exit codes: 0 success; 1 bad configuration, arguments or I/O; 2 the
//! state violates the selection criterion; 3 quadrature did not converge;
//! 4 some scan points were skipped or failed; 5 an identity check or the
//! spinor oracle failed, or the numerics broke down.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use spinstat_core::Error;

use crate::commands::Status;
use crate::config::{config_error, ConfigError, Format, RunConfig};

/// Worker-count cap read from the environment.
pub const THREADS_ENV: &str = "SPINSTAT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "spinstat",
    version,
    about = "Spin-1/2 local-equilibrium currents and their consistency checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate all currents and the averaged polarization for one state.
    Currents(CommonArgs),
    /// Check the thermodynamic identities numerically.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated identities to check (default: all).
        #[arg(long, value_delimiter = ',')]
        check: Option<Vec<String>>,
    },
    /// Evaluate the currents along a one-parameter family of states.
    Scan(CommonArgs),
    /// Compare spinor-built densities and traces with the closed forms.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration (JSON when the name ends in `.json`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file, written atomically; standard output by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads; `SPINSTAT_THREADS` caps this as well.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

/// Exit code for an error that stopped a command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Inadmissible { .. } | Error::InadmissiblePerturbation { .. }) => 2,
        Some(Error::NotConverged { .. }) => 3,
        Some(Error::InvalidState(_) | Error::InvalidSpec(_) | Error::Domain(_) | Error::MassMismatch { .. }) => 1,
        Some(Error::NonFinite(_) | Error::Overflow { .. } | Error::InvariantViolation(_)) => 5,
        None => 1,
    }
}

fn thread_count(flag: Option<u64>) -> anyhow::Result<Option<usize>> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                return Err(config_error(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                )))
            }
        },
        Err(_) => None,
    };
    let flag = flag.map(|n| n as usize);
    Ok(match (flag, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

fn load(common: &CommonArgs, required: bool) -> anyhow::Result<Option<RunConfig>> {
    match &common.config {
        Some(path) => Ok(Some(RunConfig::load(path)?)),
        None if required => Err(config_error("--config <path> is required for this command")),
        None => Ok(None),
    }
}

/// Applies command-line overrides so that the echoed configuration
/// reproduces the run.
fn apply_common(config: &mut RunConfig, common: &CommonArgs) {
    if let Some(f) = common.format {
        config.output.format = Some(f.into());
    }
    if let Some(p) = &common.out {
        config.output.path = Some(p.clone());
    }
}

/// Runs a parsed command line. Output goes to the configured file or to
/// standard output; the summary goes to standard error.
pub fn run(cli: Cli) -> anyhow::Result<Status> {
    let common = match &cli.command {
        Command::Currents(c) | Command::Scan(c) => c,
        Command::Verify { common, .. } | Command::Oracle { common, .. } => common,
    };
    if let Some(n) = thread_count(common.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(format!("cannot set up {n} worker threads: {e}")))?;
    }
    let (config, out) = match &cli.command {
        Command::Currents(common) => {
            let mut config = load(common, true)?.unwrap_or_default();
            apply_common(&mut config, common);
            (Some(config.clone()), commands::currents(&config)?)
        }
        Command::Verify { common, check } => {
            let mut config = load(common, true)?.unwrap_or_default();
            apply_common(&mut config, common);
            if let Some(list) = check {
                config.verify.checks = list.clone();
                config.validate()?;
            }
            (Some(config.clone()), commands::verify(&config)?)
        }
        Command::Scan(common) => {
            let mut config = load(common, true)?.unwrap_or_default();
            apply_common(&mut config, common);
            (Some(config.clone()), commands::scan(&config)?)
        }
        Command::Oracle { common, seed, trials } => {
            let mut config = load(common, false)?;
            if let Some(c) = config.as_mut() {
                apply_common(c, common);
            }
            let defaults = config.as_ref().map(|c| c.oracle).unwrap_or_default();
            let seed = seed.unwrap_or(defaults.seed);
            let trials = trials.map(|t| t as usize).unwrap_or(defaults.trials);
            if let Some(c) = config.as_mut() {
                c.oracle.seed = seed;
                c.oracle.trials = trials;
            }
            let out = commands::oracle(config.as_ref(), seed, trials)?;
            (config, out)
        }
    };

    let format = common
        .format
        .map(Format::from)
        .or(config.as_ref().and_then(|c| c.output.format))
        .unwrap_or(out.default_format);
    let path = common
        .out
        .clone()
        .or(config.as_ref().and_then(|c| c.output.path.clone()));
    let bytes = output::render(format, &out.document, &out.table)?;
    match path {
        Some(p) => output::write_atomic(&p, &bytes).map_err(|e| config_error(format!("{e:#}")))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    for line in &out.summary {
        eprintln!("{line}");
    }
    Ok(out.status)
}
