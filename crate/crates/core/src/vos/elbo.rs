//! Variational objective: per-observation single-draw estimate and its
//! analytic gradients.
//!
//! For an observation `(x, y)` the estimate is
//!
//! ```text
//! total = reconstruction - kl_latent2 - kl_latent1
//! ```
//!
//! where `reconstruction = log p(x | z1)` at a reparameterized draw of `z1`,
//! `kl_latent2` is the closed-form KL from the latent encoder's Gaussian to
//! the standard-normal prior, and `kl_latent1` is the closed-form KL from the
//! observation encoder's Gaussian to the latent decoder's Gaussian evaluated
//! at the drawn `z2`. Training minimizes `-total`; gradients flow through
//! both reparameterizations and both KL terms.

use rand::Rng;

use super::gaussian::{kl_diag_gaussians, reparameterize, FeatureHeads, GaussianParams};
use super::model::VosModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::GradientTape;
use crate::par;

/// Per-batch mean value of each objective term.
///
/// `total` is always exactly `reconstruction - kl_latent2 - kl_latent1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboBreakdown {
    pub reconstruction: f64,
    pub kl_latent2: f64,
    pub kl_latent1: f64,
    pub total: f64,
}

impl ElboBreakdown {
    fn assemble(reconstruction: f64, kl_latent2: f64, kl_latent1: f64) -> Result<Self> {
        let b = ElboBreakdown {
            reconstruction,
            kl_latent2,
            kl_latent1,
            total: reconstruction - kl_latent2 - kl_latent1,
        };
        b.check_finite()?;
        Ok(b)
    }

    fn check_finite(&self) -> Result<()> {
        for (v, term) in [
            (self.reconstruction, "reconstruction"),
            (self.kl_latent2, "kl_latent2"),
            (self.kl_latent1, "kl_latent1"),
        ] {
            if !v.is_finite() {
                return Err(Error::NumericalInstability { term });
            }
        }
        Ok(())
    }

    /// The quantity SGD minimizes.
    pub fn loss(&self) -> f64 {
        -self.total
    }

    fn mean_of(items: &[ElboBreakdown]) -> Result<ElboBreakdown> {
        let n = items.len() as f64;
        let r = items.iter().map(|b| b.reconstruction).sum::<f64>() / n;
        let k2 = items.iter().map(|b| b.kl_latent2).sum::<f64>() / n;
        let k1 = items.iter().map(|b| b.kl_latent1).sum::<f64>() / n;
        ElboBreakdown::assemble(r, k2, k1)
    }
}

/// Gradients of the minimized loss for all four networks, `networks()` order.
#[derive(Debug, Clone)]
pub struct VosGradients {
    pub obs_encoder: GradientTape,
    pub latent_encoder: GradientTape,
    pub latent_decoder: GradientTape,
    pub obs_decoder: GradientTape,
}

impl VosGradients {
    pub(crate) fn zeros(model: &VosModel) -> Self {
        VosGradients {
            obs_encoder: model.obs_encoder.zero_tape(),
            latent_encoder: model.latent_encoder.zero_tape(),
            latent_decoder: model.latent_decoder.zero_tape(),
            obs_decoder: model.obs_decoder.zero_tape(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &VosGradients) {
        self.obs_encoder.add_assign(&other.obs_encoder);
        self.latent_encoder.add_assign(&other.latent_encoder);
        self.latent_decoder.add_assign(&other.latent_decoder);
        self.obs_decoder.add_assign(&other.obs_decoder);
    }

    pub(crate) fn scale(&mut self, c: f64) {
        self.obs_encoder.scale(c);
        self.latent_encoder.scale(c);
        self.latent_decoder.scale(c);
        self.obs_decoder.scale(c);
    }

    /// Flat gradient vector aligned with [`VosModel::get_param`] indices.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = self.obs_encoder.flat();
        out.extend(self.latent_encoder.flat());
        out.extend(self.latent_decoder.flat());
        out.extend(self.obs_decoder.flat());
        out
    }
}

fn concat_label(v: &[f64], y: u8) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    out.extend_from_slice(v);
    out.push(f64::from(y));
    out
}

/// Deterministic single-observation estimate under caller-supplied noise.
pub fn elbo_with_noise(
    model: &VosModel,
    x: &[f64],
    y: u8,
    eps1: &[f64],
    eps2: &[f64],
) -> Result<ElboBreakdown> {
    let state = forward_state(model, x, y, eps1, eps2)?;
    Ok(state.breakdown)
}

/// Single-observation estimate plus analytic gradients of `-total`.
pub fn elbo_grad_with_noise(
    model: &VosModel,
    x: &[f64],
    y: u8,
    eps1: &[f64],
    eps2: &[f64],
) -> Result<(ElboBreakdown, VosGradients)> {
    let st = forward_state(model, x, y, eps1, eps2)?;
    let latent1 = model.dims.latent1;
    let latent2 = model.dims.latent2;

    // Reconstruction path: d(-loglik)/d(raw decoder output).
    let d_rawx: Vec<f64> = st
        .heads
        .log_likelihood_grad_raw(x, &model.kinds)
        .iter()
        .map(|g| -g)
        .collect();
    let (tape_obs_dec, d_z1_recon) = model.obs_decoder.backward(&st.trace_obs_dec, &d_rawx)?;

    // kl_latent1 partials w.r.t. the latent decoder's Gaussian.
    let mut d_rawp = vec![0.0; 2 * latent1];
    for d in 0..latent1 {
        let dm = st.q1.mean[d] - st.p1.mean[d];
        let inv_vp = (-st.p1.log_var[d]).exp();
        d_rawp[d] = -dm * inv_vp;
        d_rawp[latent1 + d] = if st.mask_p1[d] {
            0.5 * (1.0 - (st.q1.log_var[d].exp() + dm * dm) * inv_vp)
        } else {
            0.0
        };
    }
    let (tape_lat_dec, d_u1) = model.latent_decoder.backward(&st.trace_lat_dec, &d_rawp)?;

    // kl_latent2 partials plus the chain through z2's reparameterization.
    let mut d_raw2 = vec![0.0; 2 * latent2];
    for d in 0..latent2 {
        let g2 = st.q2.log_var[d];
        let d_z2 = d_u1[d];
        d_raw2[d] = st.q2.mean[d] + d_z2;
        d_raw2[latent2 + d] = if st.mask2[d] {
            0.5 * (g2.exp() - 1.0) + d_z2 * 0.5 * (0.5 * g2).exp() * eps2[d]
        } else {
            0.0
        };
    }
    let (tape_lat_enc, d_u2) = model.latent_encoder.backward(&st.trace_lat_enc, &d_raw2)?;

    // First latent collects the reconstruction and latent-encoder paths,
    // then kl_latent1's direct partials w.r.t. the observation encoder.
    let mut d_raw1 = vec![0.0; 2 * latent1];
    for d in 0..latent1 {
        let g1 = st.q1.log_var[d];
        let dm = st.q1.mean[d] - st.p1.mean[d];
        let inv_vp = (-st.p1.log_var[d]).exp();
        let d_z1 = d_z1_recon[d] + d_u2[d];
        d_raw1[d] = d_z1 + dm * inv_vp;
        d_raw1[latent1 + d] = if st.mask1[d] {
            d_z1 * 0.5 * (0.5 * g1).exp() * eps1[d] + 0.5 * ((g1 - st.p1.log_var[d]).exp() - 1.0)
        } else {
            0.0
        };
    }
    let (tape_obs_enc, _) = model.obs_encoder.backward(&st.trace_obs_enc, &d_raw1)?;

    Ok((
        st.breakdown,
        VosGradients {
            obs_encoder: tape_obs_enc,
            latent_encoder: tape_lat_enc,
            latent_decoder: tape_lat_dec,
            obs_decoder: tape_obs_dec,
        },
    ))
}

/// Batch-mean estimate with noise drawn from `rng` (one draw per
/// observation, in row order).
pub fn elbo_loss<R: Rng + ?Sized>(
    model: &VosModel,
    batch_x: &Matrix,
    batch_y: &[u8],
    rng: &mut R,
) -> Result<ElboBreakdown> {
    check_batch(model, batch_x, batch_y)?;
    let noise: Vec<(Vec<f64>, Vec<f64>)> = (0..batch_x.n_rows())
        .map(|_| model.draw_noise(rng))
        .collect();
    let per_sample: Vec<Result<ElboBreakdown>> = par::map_range(batch_x.n_rows(), |i| {
        elbo_with_noise(model, batch_x.row(i), batch_y[i], &noise[i].0, &noise[i].1)
    });
    let items = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
    ElboBreakdown::mean_of(&items)
}

/// Batch-mean estimate and gradients; the core of each training step.
pub(crate) fn elbo_grad_batch(
    model: &VosModel,
    batch_x: &Matrix,
    batch_y: &[u8],
    noise: &[(Vec<f64>, Vec<f64>)],
) -> Result<(ElboBreakdown, VosGradients)> {
    check_batch(model, batch_x, batch_y)?;
    let per_sample: Vec<Result<(ElboBreakdown, VosGradients)>> =
        par::map_range(batch_x.n_rows(), |i| {
            elbo_grad_with_noise(model, batch_x.row(i), batch_y[i], &noise[i].0, &noise[i].1)
        });
    let items = per_sample.into_iter().collect::<Result<Vec<_>>>()?;

    let breakdowns: Vec<ElboBreakdown> = items.iter().map(|(b, _)| *b).collect();
    let mean = ElboBreakdown::mean_of(&breakdowns)?;

    let mut grads = VosGradients::zeros(model);
    for (_, g) in &items {
        grads.add_assign(g);
    }
    grads.scale(1.0 / items.len() as f64);
    Ok((mean, grads))
}

fn check_batch(model: &VosModel, batch_x: &Matrix, batch_y: &[u8]) -> Result<()> {
    if batch_x.is_empty() {
        return Err(Error::DataValidation("empty batch".into()));
    }
    if batch_x.n_cols() != model.dims.n_features {
        return Err(Error::ShapeMismatch {
            context: "elbo batch width",
            expected: model.dims.n_features,
            actual: batch_x.n_cols(),
        });
    }
    if batch_y.len() != batch_x.n_rows() {
        return Err(Error::ShapeMismatch {
            context: "elbo batch labels",
            expected: batch_x.n_rows(),
            actual: batch_y.len(),
        });
    }
    if let Some(&bad) = batch_y.iter().find(|&&l| l > 1) {
        return Err(Error::DataValidation(format!(
            "labels must be 0 or 1, got {bad}"
        )));
    }
    Ok(())
}

struct SampleState {
    trace_obs_enc: crate::nn::ForwardTrace,
    trace_lat_enc: crate::nn::ForwardTrace,
    trace_lat_dec: crate::nn::ForwardTrace,
    trace_obs_dec: crate::nn::ForwardTrace,
    q1: GaussianParams,
    mask1: Vec<bool>,
    q2: GaussianParams,
    mask2: Vec<bool>,
    p1: GaussianParams,
    mask_p1: Vec<bool>,
    heads: FeatureHeads,
    breakdown: ElboBreakdown,
}

fn forward_state(
    model: &VosModel,
    x: &[f64],
    y: u8,
    eps1: &[f64],
    eps2: &[f64],
) -> Result<SampleState> {
    let trace_obs_enc = model.obs_encoder.forward_traced(x)?;
    let (q1, mask1) = GaussianParams::from_raw(trace_obs_enc.output());
    let z1 = reparameterize(&q1, eps1)?;

    let trace_lat_enc = model.latent_encoder.forward_traced(&concat_label(&z1, y))?;
    let (q2, mask2) = GaussianParams::from_raw(trace_lat_enc.output());
    let z2 = reparameterize(&q2, eps2)?;

    let trace_lat_dec = model.latent_decoder.forward_traced(&concat_label(&z2, y))?;
    let (p1, mask_p1) = GaussianParams::from_raw(trace_lat_dec.output());

    let trace_obs_dec = model.obs_decoder.forward_traced(&z1)?;
    let heads = FeatureHeads::from_raw(trace_obs_dec.output(), &model.kinds)?;

    let reconstruction = heads.log_likelihood(x)?;
    let kl_latent2 = kl_diag_gaussians(&q2, &GaussianParams::standard(model.dims.latent2))?;
    let kl_latent1 = kl_diag_gaussians(&q1, &p1)?;
    let breakdown = ElboBreakdown::assemble(reconstruction, kl_latent2, kl_latent1)?;

    Ok(SampleState {
        trace_obs_enc,
        trace_lat_enc,
        trace_lat_dec,
        trace_obs_dec,
        q1,
        mask1,
        q2,
        mask2,
        p1,
        mask_p1,
        heads,
        breakdown,
    })
}
