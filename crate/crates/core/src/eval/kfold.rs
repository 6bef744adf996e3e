//! Stratified K-fold index splitting.

use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// K `(train_indices, heldout_indices)` pairs. Folds are disjoint, their
/// union is the full index set, sizes differ by at most one, and each fold's
/// class ratio tracks the global one within a sample. Classes with fewer
/// than K members trigger an unstratified fallback.
pub fn kfold_split(data: &Dataset, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("K must be >= 2, got {k}")));
    }
    if k > data.n_rows() {
        return Err(Error::InvalidConfig(format!(
            "K = {k} exceeds dataset size {}",
            data.n_rows()
        )));
    }

    let mut rng = stream_rng(seed, streams::KFOLD);
    let stratified = [0u8, 1u8]
        .iter()
        .all(|&label| {
            let n = data.indices_of_class(label).len();
            n == 0 || n >= k
        });

    let mut fold_of = vec![0usize; data.n_rows()];
    let mut slot = 0usize;
    if stratified {
        for label in [0u8, 1u8] {
            let mut idx = data.indices_of_class(label);
            idx.shuffle(&mut rng);
            for i in idx {
                fold_of[i] = slot % k;
                slot += 1;
            }
        }
    } else {
        log::warn!("a class has fewer than {k} members; falling back to unstratified folds");
        let mut idx: Vec<usize> = (0..data.n_rows()).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = slot % k;
            slot += 1;
        }
    }

    Ok((0..k)
        .map(|fold| {
            let mut train = Vec::new();
            let mut heldout = Vec::new();
            for (i, &f) in fold_of.iter().enumerate() {
                if f == fold {
                    heldout.push(i);
                } else {
                    train.push(i);
                }
            }
            (train, heldout)
        })
        .collect())
}
