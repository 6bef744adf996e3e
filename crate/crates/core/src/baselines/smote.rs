//! SMOTE: synthetic minority rows interpolated along segments between
//! minority nearest neighbours.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::knn::k_nearest;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream_rng, streams};
use crate::vos::rows_needed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoteConfig {
    /// Minority nearest-neighbour count.
    pub k: usize,
    /// Desired minority/majority ratio after augmentation.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

/// Where a synthetic row came from: `base + t * (neighbor - base)`.
/// Indices point into the minority subset, in minority row order.
#[derive(Debug, Clone, Copy)]
pub struct SmoteOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub synthetic: Matrix,
    /// One entry per synthetic row; lets callers verify every output is a
    /// convex combination of two real minority rows.
    pub origins: Vec<SmoteOrigin>,
    pub minority_label: u8,
}

pub(crate) fn interpolate(base: &[f64], neighbor: &[f64], t: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(a, b)| a + t * (b - a))
        .collect()
}

/// Generates synthetic minority rows round-robin over minority points until
/// the target ratio is met. Each row interpolates from a minority point
/// toward one of its `k` nearest minority neighbours with `t ~ U(0,1)`.
pub fn smote(data: &Dataset, cfg: &SmoteConfig) -> Result<SmoteOutput> {
    if !(0.0 < cfg.target_ratio && cfg.target_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target_ratio must be in (0,1], got {}",
            cfg.target_ratio
        )));
    }
    let minority_label = data.minority_label()?;
    let minority_idx = data.indices_of_class(minority_label);
    let n_min = minority_idx.len();
    if n_min < cfg.k + 1 {
        return Err(Error::DataValidation(format!(
            "SMOTE needs at least k+1 = {} minority rows, found {n_min}",
            cfg.k + 1
        )));
    }
    let n_maj = data.n_rows() - n_min;
    let needed = rows_needed(n_maj, n_min, cfg.target_ratio);

    let minority = data.features.select_rows(&minority_idx);
    let neighbors = k_nearest(&minority, &minority, cfg.k, Some);

    let mut rng = stream_rng(cfg.seed, streams::SMOTE);
    let mut synthetic = Matrix::with_cols(data.n_features());
    let mut origins = Vec::with_capacity(needed);
    for gen in 0..needed {
        let base = gen % n_min;
        let nn = &neighbors[base];
        let neighbor = nn[rng.gen_range(0..nn.len())];
        let t: f64 = rng.gen();
        synthetic.push_row(&interpolate(minority.row(base), minority.row(neighbor), t));
        origins.push(SmoteOrigin { base, neighbor, t });
    }

    Ok(SmoteOutput {
        synthetic,
        origins,
        minority_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::infer_kinds;
    use proptest::prelude::*;

    fn imbalanced_2d(n_maj: usize, n_min: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_maj {
            rows.push(vec![(i % 13) as f64 * 0.31, -((i % 7) as f64) * 0.17]);
            labels.push(0);
        }
        for i in 0..n_min {
            rows.push(vec![5.0 + (i % 5) as f64 * 0.23, 5.0 + (i % 3) as f64 * 0.41]);
            labels.push(1);
        }
        let m = Matrix::from_rows(&rows).unwrap();
        let kinds = infer_kinds(&m);
        Dataset::new(m, labels, kinds).unwrap()
    }

    #[test]
    fn midpoint_and_endpoint_interpolation() {
        assert_eq!(
            interpolate(&[0.0, 0.0], &[1.0, 1.0], 0.5),
            vec![0.5, 0.5]
        );
        assert_eq!(interpolate(&[0.3, -0.2], &[9.0, 9.0], 0.0), vec![0.3, -0.2]);
        assert_eq!(interpolate(&[0.3, -0.2], &[9.0, 9.0], 1.0), vec![9.0, 9.0]);
    }

    #[test]
    fn outputs_fill_the_requested_balance() {
        let data = imbalanced_2d(100, 20);
        let out = smote(&data, &SmoteConfig::default()).unwrap();
        assert_eq!(out.synthetic.n_rows(), 80);
        assert_eq!(out.minority_label, 1);
    }

    #[test]
    fn every_output_sits_in_its_segment_box() {
        // Brute-force check over all generated rows: each coordinate lies in
        // the min/max box of its recorded endpoints.
        let data = imbalanced_2d(150, 25);
        let out = smote(&data, &SmoteConfig { k: 3, ..Default::default() }).unwrap();
        let minority_idx = data.indices_of_class(1);
        let minority = data.features.select_rows(&minority_idx);
        for (row, org) in (0..out.synthetic.n_rows()).zip(&out.origins) {
            let s = out.synthetic.row(row);
            let a = minority.row(org.base);
            let b = minority.row(org.neighbor);
            for j in 0..s.len() {
                let (lo, hi) = (a[j].min(b[j]), a[j].max(b[j]));
                assert!(
                    (lo..=hi).contains(&s[j]),
                    "coordinate {j} of row {row} left its box"
                );
            }
        }
    }

    #[test]
    fn convexity_reconstructs_from_provenance() {
        let data = imbalanced_2d(60, 12);
        let out = smote(&data, &SmoteConfig { k: 2, ..Default::default() }).unwrap();
        let minority_idx = data.indices_of_class(1);
        let minority = data.features.select_rows(&minority_idx);
        for (row, org) in (0..out.synthetic.n_rows()).zip(&out.origins) {
            assert!((0.0..=1.0).contains(&org.t));
            let rebuilt = interpolate(minority.row(org.base), minority.row(org.neighbor), org.t);
            assert_eq!(out.synthetic.row(row), rebuilt.as_slice());
        }
    }

    #[test]
    fn too_few_minority_rows_is_an_error() {
        let data = imbalanced_2d(30, 4);
        let res = smote(&data, &SmoteConfig { k: 5, ..Default::default() });
        assert!(matches!(res, Err(Error::DataValidation(_))));
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let data = imbalanced_2d(90, 15);
        let cfg = SmoteConfig { seed: 31, ..Default::default() };
        let a = smote(&data, &cfg).unwrap();
        let b = smote(&data, &cfg).unwrap();
        assert_eq!(a.synthetic, b.synthetic);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn ratio_contract_holds(n_min in 7usize..30, ratio in 0.3f64..1.0) {
            let data = imbalanced_2d(80, n_min);
            let cfg = SmoteConfig { target_ratio: ratio, ..Default::default() };
            let out = smote(&data, &cfg).unwrap();
            let total_min = n_min + out.synthetic.n_rows();
            prop_assert!(total_min as f64 / 80.0 >= ratio);
            // Never overshoots by more than one row.
            if out.synthetic.n_rows() > 0 {
                prop_assert!((total_min - 1) as f64 / 80.0 < ratio);
            }
        }
    }
}
