use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graphheat::cli;
use graphheat::config::ExperimentKind;

/// Numerical laboratory for the heat equation with variable density on
/// infinite weighted graphs.
#[derive(Parser)]
#[command(name = "graphheat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// experiment description (JSON)
    #[arg(long)]
    config: PathBuf,
    /// output directory for CSV/JSON/SVG artifacts
    #[arg(long, default_value = "graphheat-out")]
    out: PathBuf,
    /// override the config's seed for randomized suites
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// batch verification of the calculus identities
    Identities(Common),
    /// Dirichlet eigenvalues of the weighted operator on a ball
    Spectrum(Common),
    /// solve one Cauchy-Dirichlet problem and dump the trajectory
    Solve(Common),
    /// certify a barrier family
    Certify(Common),
    /// run the monotone ball-solution sequence
    Exhaust(Common),
    /// build the two-solutions non-uniqueness exhibit
    Nonuniqueness(Common),
    /// reproduce the uniqueness-results verification matrix
    Table1(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Identities(c) => (ExperimentKind::Identities, c),
        Command::Spectrum(c) => (ExperimentKind::Spectrum, c),
        Command::Solve(c) => (ExperimentKind::Solve, c),
        Command::Certify(c) => (ExperimentKind::Certify, c),
        Command::Exhaust(c) => (ExperimentKind::Exhaust, c),
        Command::Nonuniqueness(c) => (ExperimentKind::Nonuniqueness, c),
        Command::Table1(c) => (ExperimentKind::Table1, c),
    };
    let code = cli::execute(kind, &common.config, &common.out, common.seed);
    ExitCode::from(code as u8)
}
