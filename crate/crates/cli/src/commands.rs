//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use vos_core::data::{
    fit_scaler, invert_scaler, load_csv, standardize, write_atomic, write_dataset_csv,
    write_matrix_csv, Dataset, ScalerParams,
};
use vos_core::eval::{
    architecture_search, run_benchmark, BenchmarkConfig, ClassifierKind, CvConfig, OversamplerKind,
};
use vos_core::nn::TrainConfig;
use vos_core::rng::{derive_seed, stream_rng, streams};
use vos_core::vos::{
    rows_needed, sample_synthetic, train_vos, Architecture, ModelArtifact, VosModel,
};
use vos_core::baselines::{adasyn, smote, AdasynConfig, SmoteConfig};

use crate::config::{pick, FileConfig};
use crate::{DataFlags, TrainFlags};

const DEFAULT_LABEL: &str = "class";
const DEFAULT_RATIO: f64 = 1.0;
const DEFAULT_WEIGHT: f64 = 0.2;
const DEFAULT_TEST_FRACTION: f64 = 0.2;
const DEFAULT_K_FOLDS: usize = 5;

struct Resolved {
    data: PathBuf,
    label: String,
    seed: u64,
}

fn resolve_data(cfg: &FileConfig, flags: DataFlags) -> Result<Resolved> {
    let data = flags
        .data
        .or_else(|| cfg.get_str("data").map(PathBuf::from))
        .context("--data is required (or set data= in the config file)")?;
    let label = pick(flags.label, cfg.get_str("label"), DEFAULT_LABEL.to_string());
    let seed = pick(flags.seed, cfg.get::<u64>("seed")?, 0);
    Ok(Resolved { data, label, seed })
}

fn resolve_train(cfg: &FileConfig, flags: &TrainFlags, seed: u64) -> Result<(TrainConfig, Architecture)> {
    let train = TrainConfig {
        learning_rate: pick(flags.lr, cfg.get("lr")?, 0.02),
        epochs: pick(flags.epochs, cfg.get("epochs")?, 200),
        batch_size: pick(flags.batch, cfg.get("batch")?, 64),
        seed,
    };
    let arch_spec = pick(
        flags.arch.clone(),
        cfg.get_str("arch"),
        "40:10:5".to_string(),
    );
    let arch = Architecture::parse(&arch_spec)?;
    Ok((train, arch))
}

fn load_dataset(path: &Path, label: &str) -> Result<Dataset> {
    load_csv(path, label).with_context(|| format!("loading {}", path.display()))
}

/// Trains a model on the (standardized) dataset and bundles it with the
/// scaler and metadata needed to generate from the file alone.
fn fit_artifact(
    data: &Dataset,
    train: &TrainConfig,
    arch: &Architecture,
    seed: u64,
) -> Result<ModelArtifact> {
    let minority = data.minority_label()?;
    let scaler = fit_scaler(data);
    let std_data = standardize(&scaler, data)?;
    let mut model = VosModel::new(&std_data.kinds, arch, seed)?;
    let history = train_vos(&mut model, &std_data, train)?;
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        log::info!(
            "trained {} epochs: loss {:.4} -> {:.4}",
            history.len(),
            first.loss,
            last.loss
        );
    }
    Ok(ModelArtifact {
        model,
        scaler,
        column_names: data.column_names.clone(),
        minority_label: minority,
    })
}

pub fn fit(
    cfg: &FileConfig,
    data_flags: DataFlags,
    train_flags: TrainFlags,
    out: Option<PathBuf>,
) -> Result<()> {
    let r = resolve_data(cfg, data_flags)?;
    let (train, arch) = resolve_train(cfg, &train_flags, r.seed)?;
    let out = out
        .or_else(|| cfg.get_str("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("model.vos"));

    let data = load_dataset(&r.data, &r.label)?;
    let artifact = fit_artifact(&data, &train, &arch, r.seed)?;
    artifact.save(&out)?;
    let (zeros, ones) = data.class_counts();
    println!(
        "fit: {} rows ({zeros}/{ones} by class), model -> {}",
        data.n_rows(),
        out.display()
    );
    Ok(())
}

pub fn generate(
    cfg: &FileConfig,
    model: Option<PathBuf>,
    count: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    keep_standardized: bool,
) -> Result<()> {
    let model_path = model
        .or_else(|| cfg.get_str("model").map(PathBuf::from))
        .context("--model is required")?;
    let count = pick(count, cfg.get("count")?, 100);
    let out = out
        .or_else(|| cfg.get_str("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("synthetic.csv"));
    let seed = pick(seed, cfg.get("seed")?, 0);

    let artifact = ModelArtifact::load(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let mut rng = stream_rng(seed, streams::SYNTHESIS);
    let rows = sample_synthetic(&artifact.model, artifact.minority_label, count, &mut rng)?;
    let rows = if keep_standardized {
        rows
    } else {
        invert_scaler(&artifact.scaler, &rows)?
    };
    write_matrix_csv(
        &out,
        &rows,
        &artifact.column_names,
        DEFAULT_LABEL,
        artifact.minority_label,
    )?;
    println!("generate: {count} synthetic rows -> {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn augment(
    cfg: &FileConfig,
    data_flags: DataFlags,
    train_flags: TrainFlags,
    method: Option<String>,
    ratio: Option<f64>,
    weight: Option<f64>,
    model: Option<PathBuf>,
    out: Option<PathBuf>,
    keep_standardized: bool,
) -> Result<()> {
    let r = resolve_data(cfg, data_flags)?;
    let method = pick(method, cfg.get_str("method"), "vos".to_string());
    let ratio = pick(ratio, cfg.get("ratio")?, DEFAULT_RATIO);
    let weight = pick(weight, cfg.get("weight")?, DEFAULT_WEIGHT);
    let out = out
        .or_else(|| cfg.get_str("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("augmented.csv"));

    let data = load_dataset(&r.data, &r.label)?;
    let minority = data.minority_label()?;
    let (zeros, ones) = data.class_counts();
    let (majority_count, minority_count) = if minority == 1 {
        (zeros, ones)
    } else {
        (ones, zeros)
    };
    let needed = rows_needed(majority_count, minority_count, ratio);

    // Synthetic rows are produced in standardized space and mapped back.
    let (synthetic_std, scaler): (_, ScalerParams) = match method.as_str() {
        "vos" => {
            let artifact = match model {
                Some(path) => ModelArtifact::load(&path)
                    .with_context(|| format!("loading model {}", path.display()))?,
                None => {
                    let (train, arch) = resolve_train(cfg, &train_flags, r.seed)?;
                    log::info!("no --model given; training in-process");
                    fit_artifact(&data, &train, &arch, r.seed)?
                }
            };
            let mut rng = stream_rng(r.seed, streams::SYNTHESIS);
            let rows = sample_synthetic(&artifact.model, minority, needed, &mut rng)?;
            (rows, artifact.scaler)
        }
        "smote" => {
            let scaler = fit_scaler(&data);
            let std_data = standardize(&scaler, &data)?;
            let output = smote(
                &std_data,
                &SmoteConfig {
                    k: 5,
                    target_ratio: ratio,
                    seed: derive_seed(r.seed, streams::SMOTE),
                },
            )?;
            (output.synthetic, scaler)
        }
        "adasyn" => {
            let scaler = fit_scaler(&data);
            let std_data = standardize(&scaler, &data)?;
            let output = adasyn(
                &std_data,
                &AdasynConfig {
                    k: 5,
                    beta: ratio,
                    seed: derive_seed(r.seed, streams::ADASYN),
                },
            )?;
            (output.synthetic, scaler)
        }
        other => bail!("unknown method '{other}' (expected vos, smote, or adasyn)"),
    };

    let mut augmented = if keep_standardized {
        standardize(&scaler, &data)?
    } else {
        data.clone()
    };
    let synthetic = if keep_standardized {
        synthetic_std
    } else {
        invert_scaler(&scaler, &synthetic_std)?
    };
    augmented.append_synthetic(&synthetic, minority, weight)?;

    write_dataset_csv(&out, &augmented, DEFAULT_LABEL)?;
    println!(
        "augment[{method}]: {} rows ({} real + {} synthetic) -> {}",
        augmented.n_rows(),
        data.n_rows(),
        synthetic.n_rows(),
        out.display()
    );
    Ok(())
}

pub fn search(
    cfg: &FileConfig,
    data_flags: DataFlags,
    train_flags: TrainFlags,
    k_folds: Option<usize>,
    candidates: Vec<String>,
    out: Option<PathBuf>,
) -> Result<()> {
    let r = resolve_data(cfg, data_flags)?;
    let k = pick(k_folds, cfg.get("k_folds")?, DEFAULT_K_FOLDS);
    let (train, _) = resolve_train(cfg, &train_flags, r.seed)?;

    let data = load_dataset(&r.data, &r.label)?;
    let scaler = fit_scaler(&data);
    let std_data = standardize(&scaler, &data)?;

    let cv = if candidates.is_empty() {
        CvConfig::default_grid(k, r.seed)
    } else {
        let parsed: Result<Vec<Architecture>> = candidates
            .iter()
            .map(|s| Architecture::parse(s).map_err(Into::into))
            .collect();
        CvConfig {
            k,
            candidates: parsed?,
            seed: r.seed,
        }
    };

    let report = architecture_search(&std_data, &cv, &train)?;
    for score in &report.scores {
        let folds: Vec<String> = score
            .fold_losses
            .iter()
            .map(|l| l.map_or("diverged".to_string(), |v| format!("{v:.4}")))
            .collect();
        println!(
            "candidate {}: folds [{}] mean {}",
            score.architecture.describe(),
            folds.join(", "),
            score
                .mean_loss
                .map_or("-".to_string(), |v| format!("{v:.4}"))
        );
    }
    println!("selected: {}", report.best().describe());
    if let Some(path) = out {
        write_atomic(&path, report.to_json().as_bytes())?;
        println!("report -> {}", path.display());
    }
    Ok(())
}

fn parse_methods(raw: &[String]) -> Result<Vec<OversamplerKind>> {
    raw.iter()
        .map(|m| match m.as_str() {
            "vos" => Ok(OversamplerKind::Vos),
            "smote" => Ok(OversamplerKind::Smote),
            "adasyn" => Ok(OversamplerKind::Adasyn),
            "none" => Ok(OversamplerKind::None),
            other => bail!("unknown method '{other}' (expected vos, smote, adasyn, none)"),
        })
        .collect()
}

fn parse_classifiers(raw: &[String]) -> Result<Vec<ClassifierKind>> {
    raw.iter()
        .map(|c| match c.as_str() {
            "lr" => Ok(ClassifierKind::LogReg),
            "mlp" => Ok(ClassifierKind::Mlp),
            other => bail!("unknown classifier '{other}' (expected lr or mlp)"),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn benchmark(
    cfg: &FileConfig,
    data_flags: DataFlags,
    train_flags: TrainFlags,
    methods: Vec<String>,
    classifiers: Vec<String>,
    ratio: Option<f64>,
    test_fraction: Option<f64>,
    weight: Option<f64>,
    out_dir: Option<PathBuf>,
) -> Result<()> {
    let r = resolve_data(cfg, data_flags)?;
    let (train, arch) = resolve_train(cfg, &train_flags, r.seed)?;
    let methods = if methods.is_empty() {
        match cfg.get_str("method") {
            Some(m) => parse_methods(&[m])?,
            None => vec![
                OversamplerKind::Vos,
                OversamplerKind::Smote,
                OversamplerKind::Adasyn,
            ],
        }
    } else {
        parse_methods(&methods)?
    };
    let classifiers = if classifiers.is_empty() {
        match cfg.get_str("classifier") {
            Some(c) => parse_classifiers(&[c])?,
            None => vec![ClassifierKind::LogReg, ClassifierKind::Mlp],
        }
    } else {
        parse_classifiers(&classifiers)?
    };
    let out_dir = out_dir
        .or_else(|| cfg.get_str("out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let data = load_dataset(&r.data, &r.label)?;
    let bench_cfg = BenchmarkConfig {
        test_fraction: pick(test_fraction, cfg.get("test_fraction")?, DEFAULT_TEST_FRACTION),
        target_ratio: pick(ratio, cfg.get("ratio")?, DEFAULT_RATIO),
        synthetic_weight: pick(weight, cfg.get("weight")?, DEFAULT_WEIGHT),
        seed: r.seed,
        architecture: arch,
        vos_train: train,
        ..Default::default()
    };
    let report = run_benchmark(&data, &methods, &classifiers, &bench_cfg)?;

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let csv_path = out_dir.join("results.csv");
    let jsonl_path = out_dir.join("results.jsonl");
    write_atomic(&csv_path, report.to_csv().as_bytes())?;
    write_atomic(&jsonl_path, report.to_jsonl().as_bytes())?;

    print!("{}", report.to_csv());
    println!(
        "benchmark: {} rows -> {} and {}",
        report.rows.len(),
        csv_path.display(),
        jsonl_path.display()
    );
    Ok(())
}
