//! Data ingestion, standardization, and splitting.

mod csv_io;
mod dataset;
mod scaler;
mod split;

pub use csv_io::{
    format_value, load_csv, write_atomic, write_dataset_csv, write_matrix_csv, PROVENANCE_COLUMN,
    WEIGHT_COLUMN,
};
pub use dataset::{infer_kinds, Dataset, FeatureKind, Provenance};
pub use scaler::{apply_scaler, fit_scaler, invert_scaler, standardize, ColumnScale, ScalerParams};
pub use split::split_train_test;
