//! Metrics, cross-validation, architecture search, and the benchmark runner.

mod benchmark;
mod kfold;
mod metrics;
mod search;

pub use benchmark::{
    run_benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow, ClassifierKind, OversamplerKind,
};
pub use kfold::kfold_split;
pub use metrics::{
    compute_metrics, compute_metrics_with_positive, f1_from_precision_recall, ConfusionCounts,
    MetricsReport,
};
pub use search::{architecture_search, select_best, CandidateScore, CvConfig, SearchReport};
