//! `vlcfuzz`: calibrate anchors, simulate surveys, localize, tune the
//! controllers and evaluate localizers from the command line.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! runtime or data errors. Output files are written only when a command
//! succeeds.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vlcfuzz", version, about = "Fuzzy RSSI localization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON). Defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the swarm size.
    #[arg(long)]
    particles: Option<usize>,
    /// Overrides the number of PSO iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Overrides the number of simulated anchors.
    #[arg(long)]
    anchors: Option<usize>,
    /// Overrides the output directory.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            particles: self.particles,
            iterations: self.iterations,
            anchors: self.anchors,
            output_dir: self.output_dir.clone(),
        };
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit path-loss models from a calibration CSV and score the anchors.
    Calibrate {
        /// Calibration CSV (`anchor_id,distance_m,rssi_db`).
        #[arg(long, short)]
        input: PathBuf,
        /// Anchors JSON to write.
        #[arg(long, short)]
        output: PathBuf,
        /// Model reliability controller (JSON); built-in default otherwise.
        #[arg(long)]
        flc1: Option<PathBuf>,
        /// Scenario JSON supplying anchor positions.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Generate a scenario with its samples and calibration readings.
    Simulate(Common),
    /// Localize every position of a samples CSV.
    Localize {
        #[command(flatten)]
        common: Common,
        /// Anchors JSON from `calibrate` (positions required).
        #[arg(long)]
        anchors_file: PathBuf,
        /// Samples CSV (`anchor_id,position_index,sequence,rssi_db`).
        #[arg(long)]
        samples: PathBuf,
    },
    /// Tune membership functions with the particle swarm.
    Optimize(Common),
    /// Error statistics and CDFs of the configured algorithms.
    Evaluate(Common),
    /// Mean error as a function of the anchor count.
    Sweep(Common),
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let outputs = match &cli.command {
        Command::Calibrate { input, output, flc1, scenario } => {
            commands::calibrate(input, output, flc1.as_deref(), scenario.as_deref())?
        }
        Command::Simulate(c) => commands::simulate(&c.load()?)?,
        Command::Localize { common, anchors_file, samples } => {
            commands::localize(&common.load()?, anchors_file, samples)?
        }
        Command::Optimize(c) => commands::optimize(&c.load()?)?,
        Command::Evaluate(c) => commands::evaluate(&c.load()?)?,
        Command::Sweep(c) => commands::sweep(&c.load()?)?,
    };
    outputs.commit()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(written) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
