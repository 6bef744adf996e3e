//! Conditional synthesis: ancestral sampling from the trained model, and the
//! oversampling wrapper that rebalances a dataset with synthetic minority
//! rows.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::gaussian::{reparameterize, FeatureHead, FeatureHeads, GaussianParams};
use super::model::VosModel;
use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par;

/// Default loss weight for synthetic rows when rebalancing.
pub const SYNTHETIC_WEIGHT: f64 = 0.2;

/// Noise bundle for one synthetic row, drawn up front so decoding can fan
/// out over threads without touching the RNG.
struct RowNoise {
    prior: Vec<f64>,
    eps1: Vec<f64>,
    feature: Vec<f64>,
}

/// Draws `count` synthetic rows conditioned on `y_label`.
///
/// Each row: sample the outer latent from its standard-normal prior, decode
/// Gaussian parameters for the inner latent and reparameterize, then decode
/// feature heads and sample each feature (Gaussian for continuous columns,
/// Bernoulli for binary ones). Output lives in the standardized feature
/// space the model was trained in.
pub fn sample_synthetic<R: Rng + ?Sized>(
    model: &VosModel,
    y_label: u8,
    count: usize,
    rng: &mut R,
) -> Result<Matrix> {
    if !model.is_trained() {
        return Err(Error::UntrainedModel);
    }
    if y_label > 1 {
        return Err(Error::DataValidation(format!(
            "labels must be 0 or 1, got {y_label}"
        )));
    }
    let dims = model.dims();
    if count == 0 {
        return Ok(Matrix::with_cols(dims.n_features));
    }

    let noise: Vec<RowNoise> = (0..count)
        .map(|_| {
            let prior = (0..dims.latent2).map(|_| StandardNormal.sample(rng)).collect();
            let eps1 = (0..dims.latent1).map(|_| StandardNormal.sample(rng)).collect();
            // One uniform per binary feature, one normal per continuous.
            let feature = model
                .kinds()
                .iter()
                .map(|k| match k {
                    FeatureKind::Continuous => StandardNormal.sample(rng),
                    FeatureKind::Binary => rng.gen::<f64>(),
                })
                .collect();
            RowNoise {
                prior,
                eps1,
                feature,
            }
        })
        .collect();

    let rows: Vec<Result<Vec<f64>>> =
        par::map_slice(&noise, |n| decode_row(model, y_label, n));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let out = Matrix::from_rows(&rows)?;
    debug_assert_eq!(out.n_rows(), count);
    Ok(out)
}

fn decode_row(model: &VosModel, y_label: u8, noise: &RowNoise) -> Result<Vec<f64>> {
    let mut latent_input = noise.prior.clone();
    latent_input.push(f64::from(y_label));
    let raw1 = model.latent_decoder.forward(&latent_input)?;
    let (p1, _) = GaussianParams::from_raw(&raw1);
    let z1 = reparameterize(&p1, &noise.eps1)?;

    let raw_x = model.obs_decoder.forward(&z1)?;
    let heads = FeatureHeads::from_raw(&raw_x, model.kinds())?;

    let mut row = Vec::with_capacity(model.kinds().len());
    for (head, &e) in heads.heads.iter().zip(&noise.feature) {
        let v = match head {
            FeatureHead::Gaussian { mean, log_var, .. } => mean + (0.5 * log_var).exp() * e,
            FeatureHead::Bernoulli { rho, .. } => {
                if e < *rho {
                    1.0
                } else {
                    0.0
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::NumericalInstability {
                term: "synthetic feature",
            });
        }
        row.push(v);
    }
    Ok(row)
}

/// Number of synthetic minority rows needed to reach
/// `minority / majority >= target_ratio`.
pub fn rows_needed(majority: usize, minority: usize, target_ratio: f64) -> usize {
    let want = (target_ratio * majority as f64).ceil() as usize;
    want.saturating_sub(minority)
}

/// Appends synthetic minority rows until the class ratio reaches
/// `target_ratio`. Real rows keep their weights; synthetic rows get
/// `synthetic_weight` and synthetic provenance.
pub fn oversample<R: Rng + ?Sized>(
    data: &Dataset,
    model: &VosModel,
    target_ratio: f64,
    synthetic_weight: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if !(0.0 < target_ratio && target_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target_ratio must be in (0,1], got {target_ratio}"
        )));
    }
    let minority_label = data.minority_label()?;
    let (zeros, ones) = data.class_counts();
    let (majority, minority) = if minority_label == 1 {
        (zeros, ones)
    } else {
        (ones, zeros)
    };
    let needed = rows_needed(majority, minority, target_ratio);
    let synthetic = sample_synthetic(model, minority_label, needed, rng)?;
    let mut out = data.clone();
    out.append_synthetic(&synthetic, minority_label, synthetic_weight)?;
    Ok(out)
}
