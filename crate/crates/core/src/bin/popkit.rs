use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use popkit::cli;

#[derive(Parser)]
#[command(name = "popkit", version, about = "Bayesian population PK for the one-compartment oral model")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the hierarchical model by Gibbs sampling.
    Fit {
        /// Dataset CSV (`patient_id,dose_mg,time_hr,conc`).
        data: PathBuf,
        /// Run config (`key=value` lines).
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "popkit_out")]
        out: PathBuf,
    },
    /// Simulate a dataset from a truth config.
    Simulate {
        truth: PathBuf,
        #[arg(short, long, default_value = "popkit_sim")]
        out: PathBuf,
    },
    /// Recompute summaries (and bands, given the data) from draws.csv.
    Diagnose {
        draws: PathBuf,
        #[arg(short, long, default_value = "popkit_diag")]
        out: PathBuf,
        #[arg(short, long)]
        data: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let code = match Args::parse().command {
        Command::Fit { data, config, out } => cli::cmd_fit(&data, config.as_deref(), &out),
        Command::Simulate { truth, out } => cli::cmd_simulate(&truth, &out),
        Command::Diagnose { draws, out, data } => cli::cmd_diagnose(&draws, &out, data.as_deref()),
    };
    ExitCode::from(code as u8)
}
