//! The two-stage latent-variable generative model: objective, training,
//! conditional synthesis, and model persistence.

mod elbo;
mod gaussian;
mod model;
mod sample;
mod serialize;
mod train;

pub use elbo::{elbo_grad_with_noise, elbo_loss, elbo_with_noise, ElboBreakdown, VosGradients};
pub use gaussian::{
    head_width, kl_diag_gaussians, reparameterize, BernoulliParams, FeatureHead, FeatureHeads,
    GaussianParams, LN_2PI, LOG_VAR_CLAMP, RHO_EPS,
};
pub use model::{Architecture, ModelDims, VosModel};
pub use sample::{oversample, rows_needed, sample_synthetic, SYNTHETIC_WEIGHT};
pub use serialize::{ModelArtifact, FORMAT_VERSION, MAGIC};
pub use train::{train_vos, EpochStats, LossHistory};
