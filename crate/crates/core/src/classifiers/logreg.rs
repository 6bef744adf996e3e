//! L2-regularized logistic regression with per-sample weights, fitted by
//! full-batch gradient descent with backtracking line search.
//!
//! Objective: `sum_i w_i * logloss(y_i, sigmoid(beta.x_i + b)) +
//! (1/(2C)) * ||beta||^2`, intercept unregularized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{sigmoid, softplus};
use crate::par;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogRegConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iter: usize,
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            c: 10.0,
            max_iter: 10_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c: f64,
    /// False when the gradient tolerance was not reached within the
    /// iteration budget.
    pub converged: bool,
}

fn validate_fit_inputs(x: &Matrix, y: &[u8], sample_weights: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::DataValidation("empty training set".into()));
    }
    if y.len() != x.n_rows() || sample_weights.len() != x.n_rows() {
        return Err(Error::ShapeMismatch {
            context: "logreg_fit rows",
            expected: x.n_rows(),
            actual: y.len().min(sample_weights.len()),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::DataValidation(format!(
            "labels must be 0 or 1, got {bad}"
        )));
    }
    if sample_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::DataValidation(
            "sample weights must be finite and non-negative".into(),
        ));
    }
    let first = y[0];
    if y.iter().all(|&l| l == first) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Weighted objective value at `(beta, intercept)`.
pub(crate) fn objective(
    x: &Matrix,
    y: &[u8],
    w: &[f64],
    c: f64,
    beta: &[f64],
    intercept: f64,
) -> f64 {
    let losses = par::map_range(x.n_rows(), |i| {
        let t = dot(beta, x.row(i)) + intercept;
        w[i] * (softplus(t) - f64::from(y[i]) * t)
    });
    let data: f64 = losses.iter().sum();
    let ridge: f64 = beta.iter().map(|b| b * b).sum::<f64>() / (2.0 * c);
    data + ridge
}

/// Gradient of the objective; returns (d_beta, d_intercept).
pub(crate) fn gradient(
    x: &Matrix,
    y: &[u8],
    w: &[f64],
    c: f64,
    beta: &[f64],
    intercept: f64,
) -> (Vec<f64>, f64) {
    let d = x.n_cols();
    let per_row = par::map_range(x.n_rows(), |i| {
        let t = dot(beta, x.row(i)) + intercept;
        w[i] * (sigmoid(t) - f64::from(y[i]))
    });
    let mut g_beta = vec![0.0; d];
    let mut g_b = 0.0;
    for (i, r) in per_row.iter().enumerate() {
        for (gj, xj) in g_beta.iter_mut().zip(x.row(i)) {
            *gj += r * xj;
        }
        g_b += r;
    }
    for (gj, bj) in g_beta.iter_mut().zip(beta) {
        *gj += bj / c;
    }
    (g_beta, g_b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn logreg_fit(
    x: &Matrix,
    y: &[u8],
    sample_weights: &[f64],
    config: &LogRegConfig,
) -> Result<LogRegModel> {
    validate_fit_inputs(x, y, sample_weights)?;
    if !config.c.is_finite() || config.c <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "C must be positive, got {}",
            config.c
        )));
    }

    let d = x.n_cols();
    let mut beta = vec![0.0; d];
    let mut intercept = 0.0;
    let mut converged = false;
    let mut step = 1.0_f64;
    const ARMIJO: f64 = 1e-4;

    let mut f = objective(x, y, sample_weights, config.c, &beta, intercept);
    for _ in 0..config.max_iter {
        let (g_beta, g_b) = gradient(x, y, sample_weights, config.c, &beta, intercept);
        let g_norm_sq: f64 = g_beta.iter().map(|g| g * g).sum::<f64>() + g_b * g_b;
        if g_norm_sq.sqrt() <= config.tol {
            converged = true;
            break;
        }

        // Backtracking line search along the negative gradient, warm-started
        // from the previous accepted step.
        step = (step * 2.0).min(1.0e3);
        let mut accepted = false;
        for _ in 0..60 {
            let cand_beta: Vec<f64> = beta.iter().zip(&g_beta).map(|(b, g)| b - step * g).collect();
            let cand_b = intercept - step * g_b;
            let cand_f = objective(x, y, sample_weights, config.c, &cand_beta, cand_b);
            if cand_f <= f - ARMIJO * step * g_norm_sq {
                beta = cand_beta;
                intercept = cand_b;
                f = cand_f;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step collapsed to nothing; treat as stalled.
            break;
        }
    }

    if beta.iter().any(|b| !b.is_finite()) || !intercept.is_finite() {
        return Err(Error::NumericalInstability { term: "logreg parameters" });
    }
    if !converged {
        log::warn!("logistic regression did not reach tol within max_iter");
    }
    Ok(LogRegModel {
        weights: beta,
        intercept,
        c: config.c,
        converged,
    })
}

impl LogRegModel {
    /// `sigmoid(beta.x + b)` per row, clamped into the open interval (0,1).
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.weights.len() {
            return Err(Error::ShapeMismatch {
                context: "logreg predict width",
                expected: self.weights.len(),
                actual: x.n_cols(),
            });
        }
        Ok(par::map_range(x.n_rows(), |i| {
            sigmoid(dot(&self.weights, x.row(i)) + self.intercept).clamp(1e-12, 1.0 - 1e-12)
        }))
    }

    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }
}
