//! Command-line front end: simulate piecewise smooth processes, estimate
//! crossing counts, run replicated experiments, and drive the GPS pipeline.

use std::fmt::Display;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod gps;
mod harness;

/// Failure classes, each mapped to a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration; exit code 1.
    Usage(String),
    /// Unreadable or malformed input data; exit code 2.
    Data(String),
    /// The computation itself broke down; exit code 3.
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(msg) | Failure::Data(msg) | Failure::Numeric(msg) => msg,
        }
    }
}

impl From<crossings_core::Error> for Failure {
    fn from(err: crossings_core::Error) -> Self {
        use crossings_core::Error;
        match err {
            Error::InvalidParameter(_) => Failure::Usage(err.to_string()),
            Error::Data(_)
            | Error::Csv(_)
            | Error::Io(_)
            | Error::EmptyDataset
            | Error::GridMismatch(_) => Failure::Data(err.to_string()),
            Error::RateBound { .. }
            | Error::EventOverflow { .. }
            | Error::JumpOnSurface { .. }
            | Error::VertexNormal { .. }
            | Error::DegenerateSamples(_)
            | Error::SingularBandwidth
            | Error::Numeric(_) => Failure::Numeric(err.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Data(err.to_string())
    }
}

/// Attaches the offending path to a data failure.
pub fn data_error(path: &Path, err: impl Display) -> Failure {
    Failure::Data(format!("{}: {err}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "crossings",
    version,
    about = "Simulate piecewise smooth processes and estimate crossing counts",
    after_help = "RAYON_NUM_THREADS limits the worker pool. \
                  Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Simulate trajectories and write one grid CSV per trajectory.
    Simulate(commands::SimulateArgs),
    /// Estimate the mean crossing count of trajectory CSVs; JSON out.
    Estimate(commands::EstimateArgs),
    /// Run a replicated estimator comparison; CSV out.
    Experiment(commands::ExperimentArgs),
    /// High-precision reference crossing count; JSON out.
    Oracle(commands::OracleArgs),
    /// GPS trajectory pipeline.
    #[command(subcommand)]
    Gps(gps::GpsCommand),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here with use_stderr() false and
            // must exit 0; real parse errors exit 1.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(args) => commands::run_simulate(args),
        Command::Estimate(args) => commands::run_estimate(args),
        Command::Experiment(args) => commands::run_experiment_cmd(args),
        Command::Oracle(args) => commands::run_oracle(args),
        Command::Gps(command) => gps::run(command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn error_classes_map_to_distinct_exit_codes() {
        use crossings_core::Error;
        let usage: Failure = Error::InvalidParameter("x".into()).into();
        let data: Failure = Error::EmptyDataset.into();
        let numeric: Failure = Error::DegenerateSamples("x".into()).into();
        assert_eq!(usage.exit_code(), 1);
        assert_eq!(data.exit_code(), 2);
        assert_eq!(numeric.exit_code(), 3);
    }
}
