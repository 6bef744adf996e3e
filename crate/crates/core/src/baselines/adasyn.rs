//! ADASYN: adaptive allocation of synthetic minority rows, generating more
//! around minority points whose neighbourhoods are majority-dominated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::knn::k_nearest;
use super::smote::interpolate;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream_rng, streams};

/// Minority-only neighbour count used for the interpolation step, as in the
/// original algorithm.
const INTERPOLATION_K: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdasynConfig {
    /// Neighbour count over the full dataset for the difficulty estimate.
    pub k: usize,
    /// Balance level in (0,1]: 1 aims for fully balanced classes.
    pub beta: f64,
    pub seed: u64,
}

impl Default for AdasynConfig {
    fn default() -> Self {
        AdasynConfig {
            k: 5,
            beta: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdasynOutput {
    pub synthetic: Matrix,
    /// Majority-neighbour count for each minority row, in minority order.
    pub majority_neighbors: Vec<usize>,
    /// Synthetic rows allocated to each minority row.
    pub allocation: Vec<usize>,
    /// True when no minority point had majority neighbours and the
    /// allocation fell back to uniform.
    pub uniform_fallback: bool,
    pub minority_label: u8,
}

/// For each minority row: count majority points among its `k` nearest
/// neighbours in the full dataset, normalize those counts into a density,
/// allocate `g_i = round(r_hat_i * G)` with `G = (m_maj - m_min) * beta`,
/// and generate each row by SMOTE-style interpolation toward a random
/// minority neighbour.
pub fn adasyn(data: &Dataset, cfg: &AdasynConfig) -> Result<AdasynOutput> {
    if !(0.0 < cfg.beta && cfg.beta <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "beta must be in (0,1], got {}",
            cfg.beta
        )));
    }
    if cfg.k == 0 || cfg.k >= data.n_rows() {
        return Err(Error::InvalidConfig(format!(
            "k must be in [1, n_rows), got {}",
            cfg.k
        )));
    }
    let minority_label = data.minority_label()?;
    let minority_idx = data.indices_of_class(minority_label);
    let n_min = minority_idx.len();
    if n_min < 2 {
        return Err(Error::DataValidation(format!(
            "ADASYN needs at least 2 minority rows, found {n_min}"
        )));
    }
    let n_maj = data.n_rows() - n_min;

    let minority = data.features.select_rows(&minority_idx);

    // Difficulty: majority share of each minority point's full-dataset
    // neighbourhood (the point itself excluded).
    let full_neighbors = k_nearest(&minority, &data.features, cfg.k, |qi| {
        Some(minority_idx[qi])
    });
    let majority_neighbors: Vec<usize> = full_neighbors
        .iter()
        .map(|nn| {
            nn.iter()
                .filter(|&&pi| data.labels[pi] != minority_label)
                .count()
        })
        .collect();

    let r_sum: f64 = majority_neighbors.iter().map(|&d| d as f64 / cfg.k as f64).sum();
    let uniform_fallback = r_sum == 0.0;
    if uniform_fallback {
        log::warn!("ADASYN: no minority point has majority neighbours; falling back to uniform allocation");
    }

    let total = (n_maj.saturating_sub(n_min)) as f64 * cfg.beta;
    let allocation: Vec<usize> = majority_neighbors
        .iter()
        .map(|&delta| {
            let r_hat = if uniform_fallback {
                1.0 / n_min as f64
            } else {
                (delta as f64 / cfg.k as f64) / r_sum
            };
            (r_hat * total).round() as usize
        })
        .collect();

    // Interpolation neighbours come from the minority class only.
    let interp_k = INTERPOLATION_K.min(n_min - 1);
    let min_neighbors = k_nearest(&minority, &minority, interp_k, Some);

    let mut rng = stream_rng(cfg.seed, streams::ADASYN);
    let mut synthetic = Matrix::with_cols(data.n_features());
    for (i, &g) in allocation.iter().enumerate() {
        let nn = &min_neighbors[i];
        for _ in 0..g {
            let neighbor = nn[rng.gen_range(0..nn.len())];
            let t: f64 = rng.gen();
            synthetic.push_row(&interpolate(minority.row(i), minority.row(neighbor), t));
        }
    }

    Ok(AdasynOutput {
        synthetic,
        majority_neighbors,
        allocation,
        uniform_fallback,
        minority_label,
    })
}
