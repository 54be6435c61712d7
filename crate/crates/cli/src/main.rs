//! `patternmc`: simulate, fit, build, check, sweep and export user
//! metamodels from the command line.
//!
//! Exit status: 0 success, 1 I/O failure, 2 usage error, 3 parse error
//! (formula, trace log, PRISM or JSON text), 4 configuration error,
//! 5 model error (invalid or inconsistent model, impossible query).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use patternmc::Error;

use config::{CheckArgs, ExportArgs, FitArgs, SimulateArgs, SweepArgs, UmmArgs};

#[derive(Debug, Parser)]
#[command(name = "patternmc", version, about = "Activity-pattern inference and model checking of user metamodels")]
struct Cli {
    /// TOML file with one table per subcommand; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw traces from a model document.
    Simulate(SimulateArgs),
    /// Fit a pattern mixture to a trace log with EM.
    Fit(FitArgs),
    /// Write the user metamodel of one strategy as JSON.
    BuildUmm(UmmArgs),
    /// Evaluate a formula or question on a user metamodel.
    Check(CheckArgs),
    /// Evaluate a question over a parameter grid.
    Sweep(SweepArgs),
    /// Write the PRISM model and, optionally, a question property file.
    ExportPrism(ExportArgs),
}

/// Exit status of a failed run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::InvalidArgument(_) => 2,
        Error::Parse { .. }
        | Error::PrismSyntax { .. }
        | Error::MalformedLine { .. }
        | Error::UnmappedEvent { .. }
        | Error::Json(_) => 3,
        Error::Config(_) => 4,
        Error::Term { source, .. } => exit_code(source),
        Error::InvalidModel(_)
        | Error::Dimension(_)
        | Error::ZeroProbability { .. }
        | Error::UnknownProposition(_)
        | Error::EmptyStateSet(_)
        | Error::NoInitState
        | Error::GuardExceeded { .. } => 5,
    }
}

fn run(cli: Cli) -> patternmc::Result<()> {
    let file = config::ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(a.merge(file.simulate)),
        Command::Fit(a) => commands::fit(a.merge(file.fit)),
        Command::BuildUmm(a) => commands::build_umm(a.merge(file.build_umm)),
        Command::Check(a) => commands::check(a.merge(file.check)),
        Command::Sweep(a) => commands::sweep(a.merge(file.sweep)),
        Command::ExportPrism(a) => commands::export_prism(a.merge(file.export_prism)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
