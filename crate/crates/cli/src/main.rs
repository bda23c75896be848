//! Command-line front end for the macro/femto network toolkit.

mod commands;
mod config;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hetnet_core::calibration::CalibrationError;
use hetnet_core::ctmc::CtmcError;
use hetnet_core::des::DesError;
use hetnet_core::policy::PolicyKind;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// CLI-level error carrying the exit code class.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub numeric: bool,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            numeric: false,
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            numeric: true,
        }
    }

    pub fn io(err: std::io::Error) -> Self {
        CliError::config(format!("i/o error: {err}"))
    }
}

impl From<CalibrationError> for CliError {
    fn from(err: CalibrationError) -> Self {
        match &err {
            CalibrationError::Chain(chain) => match chain {
                CtmcError::NotConverged { .. }
                | CtmcError::NegativeRate { .. }
                | CtmcError::MissingTarget { .. }
                | CtmcError::NegativeProbability { .. } => CliError::numeric(err.to_string()),
                _ => CliError::config(err.to_string()),
            },
            _ => CliError::config(err.to_string()),
        }
    }
}

impl From<DesError> for CliError {
    fn from(err: DesError) -> Self {
        CliError::config(err.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hetnet",
    about = "Hierarchical macro/femto network analysis: handoff policies, \
             Markov-chain performance metrics, load balancing, and femto \
             energy accounting",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Experiment config (TOML), or a previously written experiment
    /// manifest (JSON) to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for CSV/JSON files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the config's handoff policy.
    #[arg(long, global = true, value_enum)]
    policy: Option<PolicyArg>,

    /// Which data files to write.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Both)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Conventional,
    Soft,
    Hard,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Conventional => PolicyKind::Conventional,
            PolicyArg::Soft => PolicyKind::SoftQos,
            PolicyArg::Hard => PolicyKind::HardQos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Both,
}

impl FormatArg {
    pub fn csv(self) -> bool {
        matches!(self, FormatArg::Csv | FormatArg::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, FormatArg::Json | FormatArg::Both)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the balanced RSS threshold for one or more exclusion radii.
    Calibrate {
        /// Single exclusion radius in meters; omit to run the configured
        /// radius grid.
        #[arg(long)]
        radius: Option<f64>,

        /// Bisection tolerance in dB.
        #[arg(long)]
        tol_db: Option<f64>,
    },

    /// Sweep a system parameter and record the stationary metrics.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,

        /// Exclusion radius for threshold sweeps, meters.
        #[arg(long)]
        radius: Option<f64>,

        /// Fixed macro RSS threshold for radius sweeps, dBm.
        #[arg(long)]
        threshold: Option<f64>,
    },

    /// Run the discrete-event simulator and compare against the chain.
    Simulate {
        #[arg(long, value_enum, default_value_t = ArrivalArg::Exponential)]
        arrivals: ArrivalArg,

        /// Simulated time horizon.
        #[arg(long)]
        horizon: Option<f64>,

        /// Measurement warmup; defaults to a tenth of the horizon.
        #[arg(long)]
        warmup: Option<f64>,

        /// Assign calls by sampled geometry instead of the estimated
        /// per-class probability.
        #[arg(long)]
        geometric: bool,

        /// Write a line-delimited JSON event trace.
        #[arg(long)]
        trace: bool,
    },

    /// Monthly femto energy and tariff costs across the load grid.
    Energy,

    /// Run the full study and report every reference comparison.
    Report,

    /// Print the fully resolved configuration as TOML.
    Config,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Threshold,
    Radius,
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArrivalArg {
    Exponential,
    Pareto,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let result = run(&cli);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(if e.numeric { EXIT_NUMERIC } else { EXIT_CONFIG })
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.global.config {
        Some(path) => config::ExperimentConfig::load(path)?,
        None => config::ExperimentConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    if let Some(policy) = cli.global.policy {
        config.policy.kind = policy.into();
    }

    let ctx = commands::Context {
        config,
        out_dir: cli.global.out.clone(),
        format: cli.global.format,
    };

    match &cli.command {
        Command::Calibrate { radius, tol_db } => commands::calibrate(&ctx, *radius, *tol_db),
        Command::Sweep {
            kind,
            radius,
            threshold,
        } => commands::sweep(&ctx, *kind, *radius, *threshold),
        Command::Simulate {
            arrivals,
            horizon,
            warmup,
            geometric,
            trace,
        } => commands::simulate(&ctx, *arrivals, *horizon, *warmup, *geometric, *trace),
        Command::Energy => commands::energy(&ctx),
        Command::Report => commands::report(&ctx),
        Command::Config => {
            ctx.config.scenario()?; // surface validation errors
            print!("{}", ctx.config.to_toml());
            Ok(())
        }
    }
}
