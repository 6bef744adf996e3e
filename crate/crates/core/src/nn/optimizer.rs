//! Plain constant-rate SGD.

use serde::{Deserialize, Serialize};

use super::dense::{DenseNet, GradientTape};
use crate::error::{Error, Result};

/// Hyperparameters shared by every SGD-trained model in the crate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Learning rate; must be positive.
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, dataset_size: usize) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        if dataset_size > 0 && self.batch_size > dataset_size {
            return Err(Error::InvalidConfig(format!(
                "batch_size {} exceeds dataset size {dataset_size}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Moves every parameter by `-alpha * gradient`.
///
/// Rejects non-finite gradients, naming the offending layer.
pub fn sgd_step(net: &mut DenseNet, tape: &GradientTape, alpha: f64) -> Result<()> {
    debug_assert_eq!(net.layers().len(), tape.layers.len());
    for (li, grad) in tape.layers.iter().enumerate() {
        if grad.d_weights.iter().chain(&grad.d_biases).any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { layer: li });
        }
    }
    for (layer, grad) in net.layers_mut().iter_mut().zip(&tape.layers) {
        for (w, g) in layer.weights.iter_mut().zip(&grad.d_weights) {
            *w -= alpha * g;
        }
        for (b, g) in layer.biases.iter_mut().zip(&grad.d_biases) {
            *b -= alpha * g;
        }
    }
    Ok(())
}
