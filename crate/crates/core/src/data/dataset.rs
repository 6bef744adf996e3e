//! Tabular dataset: features, binary labels, per-column kinds, per-row
//! weights and real/synthetic provenance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    /// Binary class labels, one per row.
    pub labels: Vec<u8>,
    pub kinds: Vec<FeatureKind>,
    pub column_names: Vec<String>,
    /// Per-sample loss multipliers; 1.0 unless set otherwise.
    pub weights: Vec<f64>,
    pub provenance: Vec<Provenance>,
    /// Identity of the source row, preserved across splits and subsets so
    /// leakage checks can compare index sets. Synthetic rows get fresh ids
    /// above the real range.
    pub row_ids: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset of real rows with unit weights and sequential ids.
    pub fn new(features: Matrix, labels: Vec<u8>, kinds: Vec<FeatureKind>) -> Result<Self> {
        let n = features.n_rows();
        let names = (0..features.n_cols()).map(|j| format!("f{j}")).collect();
        let ds = Dataset {
            features,
            labels,
            kinds,
            column_names: names,
            weights: vec![1.0; n],
            provenance: vec![Provenance::Real; n],
            row_ids: (0..n as u64).collect(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_rows();
        if self.labels.len() != n {
            return Err(Error::ShapeMismatch {
                context: "Dataset labels",
                expected: n,
                actual: self.labels.len(),
            });
        }
        if self.kinds.len() != self.n_features() {
            return Err(Error::ShapeMismatch {
                context: "Dataset kinds",
                expected: self.n_features(),
                actual: self.kinds.len(),
            });
        }
        if self.column_names.len() != self.n_features() {
            return Err(Error::ShapeMismatch {
                context: "Dataset column names",
                expected: self.n_features(),
                actual: self.column_names.len(),
            });
        }
        if self.weights.len() != n || self.provenance.len() != n || self.row_ids.len() != n {
            return Err(Error::DataValidation(
                "weights/provenance/row_ids length mismatch".into(),
            ));
        }
        if let Some(l) = self.labels.iter().find(|&&l| l > 1) {
            return Err(Error::DataValidation(format!(
                "labels must be 0 or 1, got {l}"
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::DataValidation(
                "sample weights must be finite and non-negative".into(),
            ));
        }
        for (j, kind) in self.kinds.iter().enumerate() {
            if *kind == FeatureKind::Binary {
                for i in 0..n {
                    let v = self.features.get(i, j);
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::DataValidation(format!(
                            "binary column '{}' holds {v} at row {}",
                            self.column_names[j],
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// (count of label 0, count of label 1).
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// The rarer label; ties resolve to 1 (the conventional positive class).
    pub fn minority_label(&self) -> Result<u8> {
        let (zeros, ones) = self.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::SingleClass);
        }
        Ok(if zeros < ones { 0 } else { 1 })
    }

    pub fn indices_of_class(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row subset in the given index order; ids and metadata follow rows.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            kinds: self.kinds.clone(),
            column_names: self.column_names.clone(),
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
            provenance: indices.iter().map(|&i| self.provenance[i]).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Appends synthetic rows with the given label and weight. Fresh row ids
    /// start after the current maximum.
    pub fn append_synthetic(&mut self, rows: &Matrix, label: u8, weight: f64) -> Result<()> {
        if rows.n_cols() != self.n_features() && !rows.is_empty() {
            return Err(Error::ShapeMismatch {
                context: "append_synthetic width",
                expected: self.n_features(),
                actual: rows.n_cols(),
            });
        }
        let mut next_id = self.row_ids.iter().max().map_or(0, |m| m + 1);
        for i in 0..rows.n_rows() {
            self.features.push_row(rows.row(i));
            self.labels.push(label);
            self.weights.push(weight);
            self.provenance.push(Provenance::Synthetic);
            self.row_ids.push(next_id);
            next_id += 1;
        }
        Ok(())
    }

    pub fn real_row_count(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| **p == Provenance::Real)
            .count()
    }
}

/// Marks each column binary when every observed value is 0 or 1, else
/// continuous.
pub fn infer_kinds(features: &Matrix) -> Vec<FeatureKind> {
    (0..features.n_cols())
        .map(|j| {
            let binary = (0..features.n_rows()).all(|i| {
                let v = features.get(i, j);
                v == 0.0 || v == 1.0
            });
            if binary && features.n_rows() > 0 {
                FeatureKind::Binary
            } else {
                FeatureKind::Continuous
            }
        })
        .collect()
}
