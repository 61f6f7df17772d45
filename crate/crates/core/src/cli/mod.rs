//! Command-line front end: config ingestion, orchestration and file output.

pub mod commands;
pub mod config;
pub mod csv;
pub mod plot;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Result;

pub use config::{config_hash, emit, load_config, parse_config, Experiment, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "social-learning", version, about = "Social learning under adversarial likelihood distortion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's output_dir or `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides base_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte Carlo trials and write trajectory/summary CSVs and a manifest.
    Simulate(RunArgs),
    /// Evaluate the limiting-behavior condition for the configured attack.
    Analyze(RunArgs),
    /// Synthesize and dump the distorted likelihoods.
    Attack(RunArgs),
    /// Plot summary CSVs as an SVG line chart.
    Plot {
        /// Summary CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Legend label per input, in order.
        #[arg(long = "label")]
        labels: Vec<String>,
        #[arg(long, default_value = "Average belief on the true state")]
        title: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> Result<(Experiment, PathBuf)> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    let exp = config.build()?;
    let out = args
        .out
        .clone()
        .or_else(|| exp.config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").to_path_buf());
    Ok((exp, out))
}

/// Runs a parsed command and returns the text to print.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(args) => {
            let (exp, out) = load(&args)?;
            Ok(commands::simulate_text(&commands::cmd_simulate(&exp, &out)?))
        }
        Command::Analyze(args) => {
            let (exp, out) = load(&args)?;
            Ok(commands::analysis_text(&commands::cmd_analyze(&exp, &out)?))
        }
        Command::Attack(args) => {
            let (exp, out) = load(&args)?;
            Ok(commands::attack_text(&commands::cmd_attack(&exp, &out)?))
        }
        Command::Plot {
            inputs,
            labels,
            title,
            out,
        } => {
            let path = commands::cmd_plot(&inputs, &labels, &title, &out)?;
            Ok(format!("wrote {}\n", path.display()))
        }
    }
}

/// Process entry point; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
