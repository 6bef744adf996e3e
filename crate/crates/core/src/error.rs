//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix did not have the expected dimensions.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A configuration value violated its documented constraints.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Input data failed validation (bad labels, non-binary values, negative weights, ...).
    #[error("data validation: {0}")]
    DataValidation(String),

    /// A CSV cell could not be parsed. Row is 1-based over data rows.
    #[error("cannot parse cell at row {row}, column '{column}': {message}")]
    CsvCell {
        row: usize,
        column: String,
        message: String,
    },

    /// The requested label column is absent from the CSV header.
    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    /// An ELBO term came out non-finite.
    #[error("numerical instability: {term} is not finite")]
    NumericalInstability { term: &'static str },

    /// A gradient entry was NaN or infinite during an optimizer step.
    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    TrainingDiverged { epoch: usize, batch: usize },

    /// Sampling was requested from a model that has not been trained.
    #[error("model has not been trained; call train first")]
    UntrainedModel,

    /// An operation that needs both classes saw only one.
    #[error("dataset contains a single class")]
    SingleClass,

    /// Backward was invoked with a forward trace from a different network.
    #[error("forward trace does not belong to this network")]
    StaleTrace,

    /// Every architecture candidate failed to train.
    #[error("architecture search failed; all candidates diverged: {0}")]
    SearchFailed(String),

    /// Rows reserved for the test split reached an oversampler.
    #[error("test-split isolation violated: {0} held-out rows leaked into oversampling input")]
    TestLeakage(usize),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
