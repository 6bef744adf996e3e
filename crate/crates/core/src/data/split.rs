//! Stratified train/test splitting.

use rand::seq::SliceRandom;

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Splits into (train, test), stratified by class. Sizes land within one row
/// of `test_fraction * N`.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(0.0 < test_fraction && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    let minority = data.minority_label()?;
    let minority_count = data.indices_of_class(minority).len();
    if minority_count < 2 {
        return Err(Error::DataValidation(format!(
            "minority class has {minority_count} rows; need at least 2 to split"
        )));
    }

    let mut rng = stream_rng(seed, streams::SPLIT);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for label in [0u8, 1u8] {
        let mut idx = data.indices_of_class(label);
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64) * test_fraction).round() as usize;
        // Keep at least one row of each class on both sides.
        let n_test = n_test.clamp(1, idx.len().saturating_sub(1));
        test_idx.extend_from_slice(&idx[..n_test]);
        train_idx.extend_from_slice(&idx[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}
