//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 2 config error, 3 IO error, 4 numeric/validation
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lqlab::commands;
use lqlab::error::Error;
use lqlab::ExperimentConfig;

#[derive(Parser)]
#[command(name = "lqlab", version, about = "Link-quality prediction laboratory")]
struct Cli {
    /// Experiment config (JSON); defaults apply if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Delivery-rate curve and RSSI/reception scatters.
    Channel,
    /// U-vs-distance curves (both schemes, analytic and empirical).
    Randomness,
    /// Model comparison tables on the mixed-distance dataset.
    Table,
    /// Per-distance train/test sweep.
    StaticSweep,
    /// Mixture-controlled randomness sweep.
    DynamicSweep,
    /// Prediction-gated reception demo.
    FilterDemo,
    /// Dataset lifecycle.
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
    /// Model lifecycle.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
}

#[derive(Subcommand)]
enum DatasetAction {
    /// Generate and persist a dataset per the config.
    Build,
    /// Summarize a stored dataset.
    Inspect {
        /// Dataset CSV path.
        #[arg(long)]
        data: PathBuf,
        /// Metadata sidecar path.
        #[arg(long)]
        meta: PathBuf,
    },
}

#[derive(Subcommand)]
enum ModelAction {
    /// Train a model on a stored dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        /// Predictor kind from the config (defaults to the first).
        #[arg(long)]
        kind: Option<String>,
    },
    /// Evaluate a stored model on a stored dataset's test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        meta: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Channel => commands::cmd_channel_curves(&cfg, out),
        Command::Randomness => commands::cmd_randomness_curve(&cfg, out),
        Command::Table => commands::cmd_table(&cfg, out),
        Command::StaticSweep => commands::cmd_static_sweep(&cfg, out),
        Command::DynamicSweep => commands::cmd_dynamic_sweep(&cfg, out),
        Command::FilterDemo => commands::cmd_filter_demo(&cfg, out),
        Command::Dataset { action } => match action {
            DatasetAction::Build => commands::cmd_dataset_build(&cfg, out),
            DatasetAction::Inspect { data, meta } => {
                let summary = commands::cmd_dataset_inspect(data, meta)?;
                print!("{summary}");
                Ok(())
            }
        },
        Command::Model { action } => match action {
            ModelAction::Train { data, meta, kind } => {
                commands::cmd_model_train(&cfg, data, meta, kind.as_deref(), out)
            }
            ModelAction::Eval { model, data, meta } => {
                let summary = commands::cmd_model_eval(&cfg, model, data, meta, out)?;
                println!("{summary}");
                Ok(())
            }
        },
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Serde(_) => 2,
        Error::Io(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
