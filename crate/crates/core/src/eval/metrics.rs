//! Confusion counts and the ROC-family scalar metrics reported per
//! benchmark row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    /// Tallies predictions against labels, treating `positive` as the
    /// positive class.
    pub fn from_predictions(preds: &[u8], labels: &[u8], positive: u8) -> Result<Self> {
        if preds.is_empty() {
            return Err(Error::DataValidation("no predictions to score".into()));
        }
        if preds.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                context: "compute_metrics",
                expected: labels.len(),
                actual: preds.len(),
            });
        }
        if preds.iter().chain(labels).any(|&v| v > 1) {
            return Err(Error::DataValidation(
                "predictions and labels must be 0 or 1".into(),
            ));
        }
        let mut c = ConfusionCounts {
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
        };
        for (&p, &l) in preds.iter().zip(labels) {
            match (p == positive, l == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// One benchmark-table row of metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `tp + fp`: how many rows the classifier called positive.
    pub predicted_positives: usize,
    /// True when a zero denominator forced precision, recall, or F1 to 0.
    pub degenerate: bool,
}

/// Harmonic mean of precision and recall; 0 when both vanish.
pub fn f1_from_precision_recall(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

impl MetricsReport {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let mut degenerate = false;
        let mut ratio = |num: usize, den: usize| -> f64 {
            if den == 0 {
                degenerate = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let accuracy = (c.tp + c.tn) as f64 / c.total() as f64;
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = f1_from_precision_recall(precision, recall);
        if precision + recall == 0.0 {
            degenerate = true;
        }
        MetricsReport {
            accuracy,
            precision,
            recall,
            f1,
            predicted_positives: c.tp + c.fp,
            degenerate,
        }
    }
}

/// Scores predictions with 1 as the positive class.
pub fn compute_metrics(preds: &[u8], labels: &[u8]) -> Result<MetricsReport> {
    compute_metrics_with_positive(preds, labels, 1)
}

pub fn compute_metrics_with_positive(
    preds: &[u8],
    labels: &[u8],
    positive: u8,
) -> Result<MetricsReport> {
    let counts = ConfusionCounts::from_predictions(preds, labels, positive)?;
    Ok(MetricsReport::from_counts(&counts))
}
