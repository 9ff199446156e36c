//! `ookbcc` command-line front end.
//!
//! ```text
//! ookbcc run (--config FILE | --preset NAME) [--seed N] [--symbols N] [--jobs N] [--out FILE]
//! ookbcc preset NAME      # print a preset as an editable TOML scenario
//! ookbcc registry         # list the built-in channel registry
//! ```
//!
//! Exit status: 0 on success, 1 when the simulation fails at run time, 2 for
//! a bad command line or scenario (the message names the offending key).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use ookbcc::config::{self, ConfigError};
use ookbcc::montecarlo::run_scenario;
use ookbcc::report::{write_registry, write_results};
use ookbcc::{Error, Scenario};

#[derive(Parser, Debug)]
#[command(
    name = "ookbcc",
    version,
    about = "Noncoherent OOK detection BER simulator for distributed receivers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its BER curves as CSV.
    Run(RunArgs),
    /// Print a built-in scenario as TOML.
    Preset {
        /// One of fig3, fig4, fig5-weak, fig5-strong, fig6, fig7.
        name: String,
    },
    /// List the built-in channel registry as CSV.
    Registry,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in scenario name (see `ookbcc preset`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the data-symbol budget per point.
    #[arg(long, value_name = "N")]
    symbols: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, value_name = "N", env = "OOKBCC_JOBS")]
    jobs: Option<usize>,

    /// Write CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter { name, reason } => Failure::Config(format!("invalid `{name}`: {reason}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(args: &RunArgs) -> Result<Scenario, Failure> {
    let mut scenario = match (&args.config, &args.preset) {
        (Some(path), _) => config::load_scenario(path)?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => unreachable!("clap requires a scenario source"),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(symbols) = args.symbols {
        scenario.n_data_symbols = symbols;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let scenario = load(&args)?;
    if args.jobs == Some(0) {
        return Err(Failure::Config("invalid `jobs`: must be >= 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(format!("cannot start worker threads: {e}")))?;
    let results = pool.install(|| run_scenario(&scenario))?;

    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(out);
    write_results(&results, &mut out).map_err(|e| Failure::Runtime(e.to_string()))?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))?;

    let failures: Vec<_> = results.iter().flat_map(|r| &r.result.failures).collect();
    if failures.is_empty() {
        return Ok(());
    }
    for f in &failures {
        eprintln!(
            "no usable training for {} at {} dBm, n_t {}: {}",
            f.technique, f.tx_power_dbm, f.n_t, f.reason
        );
    }
    Err(Failure::Runtime(format!(
        "{} point(s) could not be estimated",
        failures.len()
    )))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Preset { name } => config::preset(&name)
            .map(|s| print!("{}", config::scenario_to_toml(&s)))
            .map_err(Failure::from),
        Command::Registry => write_registry(io::stdout().lock()).map_err(|e| Failure::Runtime(e.to_string())),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
