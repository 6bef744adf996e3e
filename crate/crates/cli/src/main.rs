//! `vos` — oversample imbalanced tabular datasets with a two-stage
//! latent-variable generative model, and benchmark the result against
//! SMOTE/ADASYN with downstream classifiers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "vos",
    version,
    about = "Variational oversampling for imbalanced tabular data"
)]
struct Cli {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct TrainFlags {
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,

    /// SGD learning rate.
    #[arg(long)]
    lr: Option<f64>,

    /// Minibatch size.
    #[arg(long)]
    batch: Option<usize>,

    /// Architecture as hidden:latent1:latent2, e.g. 40:10:5.
    #[arg(long)]
    arch: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct DataFlags {
    /// Input CSV with a header row.
    #[arg(long)]
    data: Option<PathBuf>,

    /// Label column name.
    #[arg(long)]
    label: Option<String>,

    /// Master seed; all component randomness derives from it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a generative model on a CSV and save it.
    Fit {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        train: TrainFlags,
        /// Output model file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample synthetic minority rows from a saved model.
    Generate {
        /// Trained model file from `fit`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Number of rows to sample.
        #[arg(long)]
        count: Option<usize>,
        /// Output CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit rows in the standardized model space instead of the
        /// original feature space.
        #[arg(long)]
        keep_standardized: bool,
    },
    /// Emit a rebalanced copy of a dataset with weight and provenance columns.
    Augment {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        train: TrainFlags,
        /// Oversampling method: vos, smote, or adasyn.
        #[arg(long)]
        method: Option<String>,
        /// Minority/majority ratio to reach.
        #[arg(long)]
        ratio: Option<f64>,
        /// Loss weight assigned to synthetic rows.
        #[arg(long)]
        weight: Option<f64>,
        /// Reuse a trained model instead of fitting in-process (vos only).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit features in the standardized model space.
        #[arg(long)]
        keep_standardized: bool,
    },
    /// K-fold cross-validated architecture search.
    Search {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        train: TrainFlags,
        /// Fold count.
        #[arg(long)]
        k_folds: Option<usize>,
        /// Candidate architecture (repeatable); defaults to a built-in grid.
        #[arg(long = "candidate")]
        candidates: Vec<String>,
        /// Write the full per-fold report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train/evaluate every oversampler x classifier pair on a held-out split.
    Benchmark {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        train: TrainFlags,
        /// Oversampling methods to include (repeatable): vos, smote, adasyn,
        /// none. The raw baseline is always included.
        #[arg(long = "method")]
        methods: Vec<String>,
        /// Classifiers to include (repeatable): lr, mlp.
        #[arg(long = "classifier")]
        classifiers: Vec<String>,
        /// Minority/majority ratio for every oversampler.
        #[arg(long)]
        ratio: Option<f64>,
        /// Held-out test fraction.
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Loss weight for synthetic rows.
        #[arg(long)]
        weight: Option<f64>,
        /// Directory for results.csv and results.jsonl.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let file_cfg = match &cli.config {
        Some(path) => match config::FileConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::FAILURE;
            }
        },
        None => config::FileConfig::default(),
    };

    let result = match cli.command {
        Command::Fit { data, train, out } => commands::fit(&file_cfg, data, train, out),
        Command::Generate {
            model,
            count,
            out,
            seed,
            keep_standardized,
        } => commands::generate(&file_cfg, model, count, out, seed, keep_standardized),
        Command::Augment {
            data,
            train,
            method,
            ratio,
            weight,
            model,
            out,
            keep_standardized,
        } => commands::augment(
            &file_cfg,
            data,
            train,
            method,
            ratio,
            weight,
            model,
            out,
            keep_standardized,
        ),
        Command::Search {
            data,
            train,
            k_folds,
            candidates,
            out,
        } => commands::search(&file_cfg, data, train, k_folds, candidates, out),
        Command::Benchmark {
            data,
            train,
            methods,
            classifiers,
            ratio,
            test_fraction,
            weight,
            out_dir,
        } => commands::benchmark(
            &file_cfg,
            data,
            train,
            methods,
            classifiers,
            ratio,
            test_fraction,
            weight,
            out_dir,
        ),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
