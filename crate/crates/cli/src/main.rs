//! Command-line front end for the rbffd surface PDE solver.

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod surfaces;

use commands::{converge, diagnose, fit, nodes, turing};

#[derive(Parser)]
#[command(
    name = "rbffd",
    version,
    about = "Mesh-free surface-PDE solver: RBF-FD Laplace-Beltrami operators, \
             diffusion and reaction-diffusion runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or convert surface node sets with normals.
    Nodes(nodes::NodesArgs),
    /// Assemble an operator and report sparsity, bandwidth and spectrum.
    Diagnose(diagnose::DiagnoseArgs),
    /// Spatial convergence study on a refinement sequence.
    Converge(converge::ConvergeArgs),
    /// Two-species reaction-diffusion simulation with snapshots.
    Turing(turing::TuringArgs),
    /// Refit the shape-parameter seed model from sphere data.
    FitHeuristic(fit::FitArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome: Result<()> = match &cli.command {
        Command::Nodes(args) => nodes::run(args),
        Command::Diagnose(args) => diagnose::run(args),
        Command::Converge(args) => converge::run(args),
        Command::Turing(args) => turing::run(args),
        Command::FitHeuristic(args) => fit::run(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
