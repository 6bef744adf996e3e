//! Standardization of continuous columns to zero mean, unit variance.
//!
//! Fit on the training split only; binary and constant columns pass through
//! unscaled.

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// False for binary columns and for constant columns (flagged, unscaled).
    pub scaled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<ColumnScale>,
}

impl ScalerParams {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Columns that were constant at fit time and therefore left unscaled.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.scaled && c.std == 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

pub fn fit_scaler(data: &Dataset) -> ScalerParams {
    let n = data.n_rows() as f64;
    let columns = (0..data.n_features())
        .map(|j| {
            if data.kinds[j] == FeatureKind::Binary || data.n_rows() == 0 {
                return ColumnScale {
                    mean: 0.0,
                    std: 1.0,
                    scaled: false,
                };
            }
            let mean = (0..data.n_rows()).map(|i| data.features.get(i, j)).sum::<f64>() / n;
            let var = (0..data.n_rows())
                .map(|i| {
                    let d = data.features.get(i, j) - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            if std > 0.0 {
                ColumnScale {
                    mean,
                    std,
                    scaled: true,
                }
            } else {
                log::warn!("column {j} is constant; left unscaled");
                ColumnScale {
                    mean,
                    std: 0.0,
                    scaled: false,
                }
            }
        })
        .collect();
    ScalerParams { columns }
}

fn check_width(params: &ScalerParams, m: &Matrix) -> Result<()> {
    if m.n_cols() != params.n_cols() {
        return Err(Error::ShapeMismatch {
            context: "scaler width",
            expected: params.n_cols(),
            actual: m.n_cols(),
        });
    }
    Ok(())
}

pub fn apply_scaler(params: &ScalerParams, features: &Matrix) -> Result<Matrix> {
    check_width(params, features)?;
    let mut out = features.clone();
    for (j, col) in params.columns.iter().enumerate() {
        if !col.scaled {
            continue;
        }
        for i in 0..out.n_rows() {
            out.set(i, j, (out.get(i, j) - col.mean) / col.std);
        }
    }
    Ok(out)
}

pub fn invert_scaler(params: &ScalerParams, features: &Matrix) -> Result<Matrix> {
    check_width(params, features)?;
    let mut out = features.clone();
    for (j, col) in params.columns.iter().enumerate() {
        if !col.scaled {
            continue;
        }
        for i in 0..out.n_rows() {
            out.set(i, j, out.get(i, j) * col.std + col.mean);
        }
    }
    Ok(out)
}

/// Returns a copy of the dataset with standardized features.
pub fn standardize(params: &ScalerParams, data: &Dataset) -> Result<Dataset> {
    let mut out = data.clone();
    out.features = apply_scaler(params, &data.features)?;
    Ok(out)
}
