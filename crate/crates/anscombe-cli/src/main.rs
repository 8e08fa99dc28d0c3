mod commands;
mod config;
mod dataset_io;
mod plot;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anscombe",
    about = "Generate and verify datasets with identical regression statistics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate datasets satisfying a six-constraint target
    Generate(commands::GenerateArgs),
    /// Verify a dataset file against a constraint target
    Verify(commands::VerifyArgs),
    /// Emit the classic quartet with its statistics and moment tables
    Quartet(commands::QuartetArgs),
    /// Render dataset files as a multi-panel SVG scatter plot
    Plot(commands::PlotArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => commands::run_generate(args),
        Command::Verify(args) => commands::run_verify(args),
        Command::Quartet(args) => commands::run_quartet(args),
        Command::Plot(args) => commands::run_plot(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
