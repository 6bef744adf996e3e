//! Small MLP classifier with a sigmoid scalar output, trained on weighted
//! log-loss by the shared SGD substrate.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{sgd_step, Activation, DenseNet, TrainConfig};
use crate::par;
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths; tanh activations.
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![32],
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    net: DenseNet,
}

pub fn mlp_clf_fit(
    x: &Matrix,
    y: &[u8],
    sample_weights: &[f64],
    config: &MlpConfig,
) -> Result<MlpClassifier> {
    if x.is_empty() {
        return Err(Error::DataValidation("empty training set".into()));
    }
    if y.len() != x.n_rows() || sample_weights.len() != x.n_rows() {
        return Err(Error::ShapeMismatch {
            context: "mlp_clf_fit rows",
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
    config.train.validate(x.n_rows())?;
    if config.hidden.contains(&0) {
        return Err(Error::InvalidConfig("hidden widths must be positive".into()));
    }

    let mut dims = Vec::with_capacity(config.hidden.len() + 2);
    dims.push(x.n_cols());
    dims.extend_from_slice(&config.hidden);
    dims.push(1);
    let mut init_rng = stream_rng(config.train.seed, streams::MLP_INIT);
    let mut net = DenseNet::new(&dims, Activation::Tanh, Activation::Sigmoid, &mut init_rng);

    let mut shuffle_rng = stream_rng(config.train.seed, streams::MLP_SHUFFLE);
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    for epoch in 0..config.train.epochs {
        order.shuffle(&mut shuffle_rng);
        for (batch_no, chunk) in order.chunks(config.train.batch_size).enumerate() {
            // Per-sample gradients; the log-loss gradient is taken at the
            // output logit, (p - y), which keeps saturation stable.
            let per_sample: Vec<Result<crate::nn::GradientTape>> =
                par::map_slice(chunk, |&i| {
                    let trace = net.forward_traced(x.row(i))?;
                    let p = trace.output()[0];
                    let upstream = [sample_weights[i] * (p - f64::from(y[i]))];
                    let (tape, _) = net.backward_from_preactivation(&trace, &upstream)?;
                    Ok(tape)
                });
            let tapes = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
            let mut grad = net.zero_tape();
            for t in &tapes {
                grad.add_assign(t);
            }
            grad.scale(1.0 / chunk.len() as f64);
            sgd_step(&mut net, &grad, config.train.learning_rate).map_err(|_| {
                Error::TrainingDiverged {
                    epoch,
                    batch: batch_no,
                }
            })?;
        }
    }
    Ok(MlpClassifier { net })
}

impl MlpClassifier {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.net.in_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp predict width",
                expected: self.net.in_dim(),
                actual: x.n_cols(),
            });
        }
        let rows: Vec<Result<f64>> = par::map_range(x.n_rows(), |i| {
            Ok(self.net.forward(x.row(i))?[0].clamp(1e-12, 1.0 - 1e-12))
        });
        rows.into_iter().collect()
    }

    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }

    pub fn network(&self) -> &DenseNet {
        &self.net
    }
}
