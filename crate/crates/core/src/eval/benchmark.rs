//! Benchmark runner: oversample the training split with each method, fit
//! each classifier with sample weights, and score every pair on an untouched
//! test split.

use std::collections::HashSet;

use serde::Serialize;

use super::metrics::{compute_metrics_with_positive, MetricsReport};
use crate::baselines::{adasyn, smote, AdasynConfig, SmoteConfig};
use crate::classifiers::{logreg_fit, mlp_clf_fit, LogRegConfig, MlpConfig};
use crate::data::{fit_scaler, split_train_test, standardize, Dataset, Provenance};
use crate::error::{Error, Result};
use crate::nn::TrainConfig;
use crate::rng::{derive_seed, stream_rng, streams};
use crate::vos::{oversample, train_vos, Architecture, VosModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OversamplerKind {
    /// Raw training data, the no-oversampling baseline.
    None,
    Vos,
    Smote,
    Adasyn,
}

impl OversamplerKind {
    pub fn label(self) -> &'static str {
        match self {
            OversamplerKind::None => "",
            OversamplerKind::Vos => "VOS",
            OversamplerKind::Smote => "SMOTE",
            OversamplerKind::Adasyn => "ADASYN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    LogReg,
    Mlp,
}

impl ClassifierKind {
    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::LogReg => "LR",
            ClassifierKind::Mlp => "MLP",
        }
    }
}

fn row_name(method: OversamplerKind, clf: ClassifierKind) -> String {
    match method {
        OversamplerKind::None => clf.label().to_string(),
        m => format!("{}+{}", m.label(), clf.label()),
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub test_fraction: f64,
    /// Minority/majority ratio every oversampler targets.
    pub target_ratio: f64,
    /// Loss weight for synthetic rows.
    pub synthetic_weight: f64,
    /// Master seed; all per-method randomness derives from it.
    pub seed: u64,
    pub architecture: Architecture,
    pub vos_train: TrainConfig,
    pub smote_k: usize,
    pub adasyn_k: usize,
    pub adasyn_beta: f64,
    pub logreg: LogRegConfig,
    pub mlp: MlpConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            test_fraction: 0.2,
            target_ratio: 1.0,
            synthetic_weight: crate::vos::SYNTHETIC_WEIGHT,
            seed: 0,
            architecture: Architecture::default(),
            vos_train: TrainConfig::default(),
            smote_k: 5,
            adasyn_k: 5,
            adasyn_beta: 1.0,
            logreg: LogRegConfig::default(),
            mlp: MlpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRow {
    pub method: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    /// Fixed-schema CSV, three decimals for display.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,accuracy,precision,recall,f1,predicted\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{:.3},{:.3},{:.3},{}\n",
                row.method,
                row.metrics.accuracy,
                row.metrics.precision,
                row.metrics.recall,
                row.metrics.f1,
                row.metrics.predicted_positives
            ));
        }
        out
    }

    /// Full-precision JSON-lines sibling of the CSV.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("row serializes"));
            out.push('\n');
        }
        out
    }

    pub fn row(&self, method: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Runs every `(method + implicit raw baseline) x classifier` pair.
///
/// The test split never reaches an oversampler; row-id provenance is checked
/// and a violation is a hard error.
pub fn run_benchmark(
    data: &Dataset,
    methods: &[OversamplerKind],
    classifiers: &[ClassifierKind],
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    if classifiers.is_empty() {
        return Err(Error::InvalidConfig("no classifiers selected".into()));
    }
    let positive = data.minority_label()?;
    let (train, test) = split_train_test(data, cfg.test_fraction, cfg.seed)?;

    let scaler = fit_scaler(&train);
    let train_std = standardize(&scaler, &train)?;
    let test_std = standardize(&scaler, &test)?;

    let train_ids: HashSet<u64> = train_std.row_ids.iter().copied().collect();
    let test_ids: HashSet<u64> = test_std.row_ids.iter().copied().collect();
    let overlap = train_ids.intersection(&test_ids).count();
    if overlap > 0 {
        return Err(Error::TestLeakage(overlap));
    }

    let mut method_list = vec![OversamplerKind::None];
    for &m in methods {
        if m != OversamplerKind::None && !method_list.contains(&m) {
            method_list.push(m);
        }
    }

    // Oversample once per method, then reuse for every classifier.
    let mut augmented: Vec<(OversamplerKind, Dataset)> = Vec::with_capacity(method_list.len());
    for (mi, &method) in method_list.iter().enumerate() {
        let stream = streams::BENCH_BASE + mi as u64;
        let method_seed = derive_seed(cfg.seed, stream);
        let aug = match method {
            OversamplerKind::None => train_std.clone(),
            OversamplerKind::Vos => {
                let mut model = VosModel::new(&train_std.kinds, &cfg.architecture, method_seed)?;
                let train_cfg = TrainConfig {
                    seed: method_seed,
                    ..cfg.vos_train.clone()
                };
                train_vos(&mut model, &train_std, &train_cfg)?;
                let mut rng = stream_rng(method_seed, streams::SYNTHESIS);
                oversample(
                    &train_std,
                    &model,
                    cfg.target_ratio,
                    cfg.synthetic_weight,
                    &mut rng,
                )?
            }
            OversamplerKind::Smote => {
                let out = smote(
                    &train_std,
                    &SmoteConfig {
                        k: cfg.smote_k,
                        target_ratio: cfg.target_ratio,
                        seed: method_seed,
                    },
                )?;
                let mut aug = train_std.clone();
                aug.append_synthetic(&out.synthetic, out.minority_label, cfg.synthetic_weight)?;
                aug
            }
            OversamplerKind::Adasyn => {
                let out = adasyn(
                    &train_std,
                    &AdasynConfig {
                        k: cfg.adasyn_k,
                        beta: cfg.adasyn_beta,
                        seed: method_seed,
                    },
                )?;
                let mut aug = train_std.clone();
                aug.append_synthetic(&out.synthetic, out.minority_label, cfg.synthetic_weight)?;
                aug
            }
        };

        // Isolation assertion: every real row the oversampler saw belongs to
        // the training split.
        let leaked = aug
            .row_ids
            .iter()
            .zip(&aug.provenance)
            .filter(|(id, p)| **p == Provenance::Real && test_ids.contains(id))
            .count();
        if leaked > 0 {
            return Err(Error::TestLeakage(leaked));
        }
        augmented.push((method, aug));
    }

    let mut rows = Vec::with_capacity(method_list.len() * classifiers.len());
    for &clf in classifiers {
        for (method, aug) in &augmented {
            let preds = match clf {
                ClassifierKind::LogReg => {
                    let model = logreg_fit(&aug.features, &aug.labels, &aug.weights, &cfg.logreg)?;
                    model.predict(&test_std.features, 0.5)?
                }
                ClassifierKind::Mlp => {
                    let mlp_cfg = MlpConfig {
                        hidden: cfg.mlp.hidden.clone(),
                        train: TrainConfig {
                            seed: derive_seed(cfg.seed, streams::BENCH_BASE + 0x1000),
                            ..cfg.mlp.train.clone()
                        },
                    };
                    let model = mlp_clf_fit(&aug.features, &aug.labels, &aug.weights, &mlp_cfg)?;
                    model.predict(&test_std.features, 0.5)?
                }
            };
            let metrics = compute_metrics_with_positive(&preds, &test_std.labels, positive)?;
            rows.push(BenchmarkRow {
                method: row_name(*method, clf),
                metrics,
            });
        }
    }

    Ok(BenchmarkReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::infer_kinds;
    use crate::linalg::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Overlapping 2-D Gaussians, 400 majority / 40 minority.
    fn imbalanced(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        for _ in 0..400 {
            rows.push(vec![normal(), normal()]);
            labels.push(0);
        }
        for _ in 0..40 {
            rows.push(vec![1.6 + 0.8 * normal(), 1.6 + 0.8 * normal()]);
            labels.push(1);
        }
        let m = Matrix::from_rows(&rows).unwrap();
        let kinds = infer_kinds(&m);
        Dataset::new(m, labels, kinds).unwrap()
    }

    fn quick_cfg(seed: u64) -> BenchmarkConfig {
        BenchmarkConfig {
            seed,
            architecture: Architecture::symmetric(8, 3, 2),
            vos_train: TrainConfig {
                learning_rate: 0.02,
                epochs: 15,
                batch_size: 32,
                seed: 0,
            },
            mlp: MlpConfig {
                hidden: vec![8],
                train: TrainConfig {
                    learning_rate: 0.1,
                    epochs: 30,
                    batch_size: 32,
                    seed: 0,
                },
            },
            ..Default::default()
        }
    }

    #[test]
    fn row_count_is_methods_plus_one_times_classifiers() {
        let data = imbalanced(0);
        let report = run_benchmark(
            &data,
            &[OversamplerKind::Smote, OversamplerKind::Adasyn],
            &[ClassifierKind::LogReg, ClassifierKind::Mlp],
            &quick_cfg(1),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report.row("LR").is_some());
        assert!(report.row("SMOTE+LR").is_some());
        assert!(report.row("ADASYN+MLP").is_some());
    }

    #[test]
    fn none_row_matches_direct_raw_fit() {
        let data = imbalanced(1);
        let cfg = quick_cfg(7);
        let report =
            run_benchmark(&data, &[], &[ClassifierKind::LogReg], &cfg).unwrap();
        let baseline = report.row("LR").unwrap();

        // Recompute the plain-LR row by hand along the same path.
        let (train, test) = split_train_test(&data, cfg.test_fraction, cfg.seed).unwrap();
        let scaler = fit_scaler(&train);
        let train_std = standardize(&scaler, &train).unwrap();
        let test_std = standardize(&scaler, &test).unwrap();
        let model =
            logreg_fit(&train_std.features, &train_std.labels, &train_std.weights, &cfg.logreg)
                .unwrap();
        let preds = model.predict(&test_std.features, 0.5).unwrap();
        let expect = compute_metrics_with_positive(&preds, &test_std.labels, 1).unwrap();
        assert_eq!(baseline.metrics, expect);
    }

    #[test]
    fn report_formats_are_consistent() {
        let data = imbalanced(2);
        let report = run_benchmark(
            &data,
            &[OversamplerKind::Smote],
            &[ClassifierKind::LogReg],
            &quick_cfg(3),
        )
        .unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "method,accuracy,precision,recall,f1,predicted");
        assert_eq!(csv.lines().count(), 1 + report.rows.len());
        let jsonl = report.to_jsonl();
        assert_eq!(jsonl.lines().count(), report.rows.len());
        for line in jsonl.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("method").is_some());
            assert!(v.get("recall").is_some());
        }
    }

    #[test]
    fn same_seed_gives_identical_tables() {
        let data = imbalanced(3);
        let methods = [OversamplerKind::Vos, OversamplerKind::Smote];
        let cfg = quick_cfg(11);
        let a = run_benchmark(&data, &methods, &[ClassifierKind::LogReg], &cfg).unwrap();
        let b = run_benchmark(&data, &methods, &[ClassifierKind::LogReg], &cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }
}
