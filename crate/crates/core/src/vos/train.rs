//! SGD training loop for the generative model.

use rand::seq::SliceRandom;

use super::elbo::elbo_grad_batch;
use super::model::VosModel;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{sgd_step, TrainConfig};
use crate::rng::{stream_rng, streams};

/// Per-epoch training record: the mean batch loss plus the objective terms
/// behind it, all sample-weighted means over the epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub loss: f64,
    pub reconstruction: f64,
    pub kl_latent2: f64,
    pub kl_latent1: f64,
}

pub type LossHistory = Vec<EpochStats>;

/// Trains in place by minibatch SGD on the negative objective.
///
/// The dataset must already be standardized; binary columns are validated.
/// Shuffling and noise come from streams derived from `config.seed`, so a
/// fixed seed reproduces the run bit-for-bit. The last partial batch of each
/// epoch is kept.
pub fn train_vos(model: &mut VosModel, data: &Dataset, config: &TrainConfig) -> Result<LossHistory> {
    data.validate()?;
    config.validate(data.n_rows())?;
    if data.n_features() != model.dims().n_features {
        return Err(Error::ShapeMismatch {
            context: "train_vos features",
            expected: model.dims().n_features,
            actual: data.n_features(),
        });
    }

    let mut shuffle_rng = stream_rng(config.seed, streams::TRAIN_SHUFFLE);
    let mut noise_rng = stream_rng(config.seed, streams::TRAIN_NOISE);
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sums = EpochStats {
            loss: 0.0,
            reconstruction: 0.0,
            kl_latent2: 0.0,
            kl_latent1: 0.0,
        };
        for (batch_no, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch_x = data.features.select_rows(chunk);
            let batch_y: Vec<u8> = chunk.iter().map(|&i| data.labels[i]).collect();
            let noise: Vec<_> = (0..chunk.len())
                .map(|_| model.draw_noise(&mut noise_rng))
                .collect();

            let diverged = |_| Error::TrainingDiverged {
                epoch,
                batch: batch_no,
            };
            let (breakdown, grads) =
                elbo_grad_batch(model, &batch_x, &batch_y, &noise).map_err(diverged)?;
            let loss = breakdown.loss();
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    batch: batch_no,
                });
            }
            let b = chunk.len() as f64;
            sums.loss += loss * b;
            sums.reconstruction += breakdown.reconstruction * b;
            sums.kl_latent2 += breakdown.kl_latent2 * b;
            sums.kl_latent1 += breakdown.kl_latent1 * b;

            sgd_step(&mut model.obs_encoder, &grads.obs_encoder, config.learning_rate)
                .map_err(diverged)?;
            sgd_step(
                &mut model.latent_encoder,
                &grads.latent_encoder,
                config.learning_rate,
            )
            .map_err(diverged)?;
            sgd_step(
                &mut model.latent_decoder,
                &grads.latent_decoder,
                config.learning_rate,
            )
            .map_err(diverged)?;
            sgd_step(&mut model.obs_decoder, &grads.obs_decoder, config.learning_rate)
                .map_err(diverged)?;
        }
        let n = data.n_rows() as f64;
        history.push(EpochStats {
            loss: sums.loss / n,
            reconstruction: sums.reconstruction / n,
            kl_latent2: sums.kl_latent2 / n,
            kl_latent1: sums.kl_latent1 / n,
        });
    }

    model.trained = true;
    Ok(history)
}
