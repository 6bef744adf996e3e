//! The two-stage latent-variable generative model.
//!
//! Four dense networks: the observation encoder maps a row to Gaussian
//! parameters over the first latent; the latent encoder maps (first latent,
//! label) to parameters over the second latent; the latent decoder inverts
//! that; the observation decoder maps the first latent to per-feature
//! reconstruction heads. The label enters as one appended scalar in {0,1}.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gaussian::head_width;
use crate::data::FeatureKind;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseNet};
use crate::rng::{stream_rng, streams};

/// Latent and hidden-layer sizing for the four networks.
///
/// The encoder/decoder pairs are kept mirror-symmetric: the latent decoder's
/// hidden stack is the reverse of the latent encoder's, and likewise for the
/// observation pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub obs_encoder_hidden: Vec<usize>,
    pub latent_encoder_hidden: Vec<usize>,
    pub latent_decoder_hidden: Vec<usize>,
    pub obs_decoder_hidden: Vec<usize>,
    pub latent1: usize,
    pub latent2: usize,
}

impl Architecture {
    /// One shared hidden width across all four networks.
    pub fn symmetric(hidden: usize, latent1: usize, latent2: usize) -> Self {
        Architecture {
            obs_encoder_hidden: vec![hidden],
            latent_encoder_hidden: vec![hidden],
            latent_decoder_hidden: vec![hidden],
            obs_decoder_hidden: vec![hidden],
            latent1,
            latent2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .obs_encoder_hidden
            .iter()
            .chain(&self.latent_encoder_hidden)
            .chain(&self.latent_decoder_hidden)
            .chain(&self.obs_decoder_hidden);
        for &w in all {
            if w == 0 {
                return Err(Error::InvalidConfig("hidden widths must be positive".into()));
            }
        }
        if self.latent1 == 0 || self.latent2 == 0 {
            return Err(Error::InvalidConfig(
                "latent dimensions must be positive".into(),
            ));
        }
        let mirrored = |enc: &[usize], dec: &[usize]| {
            enc.len() == dec.len() && enc.iter().rev().zip(dec).all(|(a, b)| a == b)
        };
        if !mirrored(&self.latent_encoder_hidden, &self.latent_decoder_hidden)
            || !mirrored(&self.obs_encoder_hidden, &self.obs_decoder_hidden)
        {
            return Err(Error::InvalidConfig(
                "encoder/decoder hidden stacks must mirror each other".into(),
            ));
        }
        Ok(())
    }

    /// Total parameter count a model with these sizes would have; used for
    /// tie-breaking in the architecture search.
    pub fn param_count(&self, kinds: &[FeatureKind]) -> usize {
        let dense = |dims: &[usize]| -> usize {
            dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
        };
        let d_x = kinds.len();
        dense(&net_dims(d_x, &self.obs_encoder_hidden, 2 * self.latent1))
            + dense(&net_dims(
                self.latent1 + 1,
                &self.latent_encoder_hidden,
                2 * self.latent2,
            ))
            + dense(&net_dims(
                self.latent2 + 1,
                &self.latent_decoder_hidden,
                2 * self.latent1,
            ))
            + dense(&net_dims(
                self.latent1,
                &self.obs_decoder_hidden,
                head_width(kinds),
            ))
    }

    /// `hidden:latent1:latent2` form used by the CLI.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "architecture spec must be hidden:latent1:latent2, got '{spec}'"
            )));
        }
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| {
                p.parse::<usize>().map_err(|_| {
                    Error::InvalidConfig(format!("bad architecture component '{p}'"))
                })
            })
            .collect::<Result<_>>()?;
        let arch = Architecture::symmetric(nums[0], nums[1], nums[2]);
        arch.validate()?;
        Ok(arch)
    }

    pub fn describe(&self) -> String {
        format!(
            "hidden={:?} latent1={} latent2={}",
            self.obs_encoder_hidden, self.latent1, self.latent2
        )
    }
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture::symmetric(40, 10, 5)
    }
}

fn net_dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(input);
    dims.extend_from_slice(hidden);
    dims.push(output);
    dims
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub n_features: usize,
    pub latent1: usize,
    pub latent2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VosModel {
    pub(crate) obs_encoder: DenseNet,
    pub(crate) latent_encoder: DenseNet,
    pub(crate) latent_decoder: DenseNet,
    pub(crate) obs_decoder: DenseNet,
    pub(crate) dims: ModelDims,
    pub(crate) kinds: Vec<FeatureKind>,
    pub(crate) trained: bool,
}

impl VosModel {
    /// Fresh Xavier-initialized model. `seed` feeds a dedicated init stream.
    pub fn new(kinds: &[FeatureKind], arch: &Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        if kinds.is_empty() {
            return Err(Error::InvalidConfig("model needs at least one feature".into()));
        }
        let d_x = kinds.len();
        let mut rng = stream_rng(seed, streams::MODEL_INIT);
        let tanh = Activation::Tanh;
        let id = Activation::Identity;
        let obs_encoder = DenseNet::new(
            &net_dims(d_x, &arch.obs_encoder_hidden, 2 * arch.latent1),
            tanh,
            id,
            &mut rng,
        );
        let latent_encoder = DenseNet::new(
            &net_dims(
                arch.latent1 + 1,
                &arch.latent_encoder_hidden,
                2 * arch.latent2,
            ),
            tanh,
            id,
            &mut rng,
        );
        let latent_decoder = DenseNet::new(
            &net_dims(
                arch.latent2 + 1,
                &arch.latent_decoder_hidden,
                2 * arch.latent1,
            ),
            tanh,
            id,
            &mut rng,
        );
        let obs_decoder = DenseNet::new(
            &net_dims(arch.latent1, &arch.obs_decoder_hidden, head_width(kinds)),
            tanh,
            id,
            &mut rng,
        );
        VosModel::from_parts(
            obs_encoder,
            latent_encoder,
            latent_decoder,
            obs_decoder,
            kinds.to_vec(),
            false,
        )
    }

    /// Assembles a model from existing networks, enforcing the width
    /// invariants that tie the four networks together.
    pub fn from_parts(
        obs_encoder: DenseNet,
        latent_encoder: DenseNet,
        latent_decoder: DenseNet,
        obs_decoder: DenseNet,
        kinds: Vec<FeatureKind>,
        trained: bool,
    ) -> Result<Self> {
        let d_x = kinds.len();
        if obs_encoder.in_dim() != d_x {
            return Err(Error::ShapeMismatch {
                context: "obs_encoder input",
                expected: d_x,
                actual: obs_encoder.in_dim(),
            });
        }
        if obs_encoder.out_dim() % 2 != 0 {
            return Err(Error::InvalidConfig(
                "obs_encoder output width must be even (mean || log_var)".into(),
            ));
        }
        let latent1 = obs_encoder.out_dim() / 2;
        if latent_encoder.in_dim() != latent1 + 1 {
            return Err(Error::ShapeMismatch {
                context: "latent_encoder input",
                expected: latent1 + 1,
                actual: latent_encoder.in_dim(),
            });
        }
        if latent_encoder.out_dim() % 2 != 0 {
            return Err(Error::InvalidConfig(
                "latent_encoder output width must be even".into(),
            ));
        }
        let latent2 = latent_encoder.out_dim() / 2;
        if latent_decoder.in_dim() != latent2 + 1 {
            return Err(Error::ShapeMismatch {
                context: "latent_decoder input",
                expected: latent2 + 1,
                actual: latent_decoder.in_dim(),
            });
        }
        if latent_decoder.out_dim() != 2 * latent1 {
            return Err(Error::ShapeMismatch {
                context: "latent_decoder output",
                expected: 2 * latent1,
                actual: latent_decoder.out_dim(),
            });
        }
        if obs_decoder.in_dim() != latent1 {
            return Err(Error::ShapeMismatch {
                context: "obs_decoder input",
                expected: latent1,
                actual: obs_decoder.in_dim(),
            });
        }
        if obs_decoder.out_dim() != head_width(&kinds) {
            return Err(Error::ShapeMismatch {
                context: "obs_decoder output",
                expected: head_width(&kinds),
                actual: obs_decoder.out_dim(),
            });
        }
        Ok(VosModel {
            obs_encoder,
            latent_encoder,
            latent_decoder,
            obs_decoder,
            dims: ModelDims {
                n_features: d_x,
                latent1,
                latent2,
            },
            kinds,
            trained,
        })
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn networks(&self) -> [&DenseNet; 4] {
        [
            &self.obs_encoder,
            &self.latent_encoder,
            &self.latent_decoder,
            &self.obs_decoder,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.networks().iter().map(|n| n.param_count()).sum()
    }

    /// Flat parameter access across all four networks, in `networks()` order.
    /// Shared index space with [`super::elbo::VosGradients::flat`].
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for net in self.networks() {
            if idx < net.param_count() {
                return net.get_param(idx);
            }
            idx -= net.param_count();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, v: f64) {
        for net in [
            &mut self.obs_encoder,
            &mut self.latent_encoder,
            &mut self.latent_decoder,
            &mut self.obs_decoder,
        ] {
            if idx < net.param_count() {
                net.set_param(idx, v);
                return;
            }
            idx -= net.param_count();
        }
        panic!("parameter index out of range");
    }

    /// Standard-normal noise pair for one observation, drawn in a fixed
    /// order (first-latent noise, then second-latent).
    pub(crate) fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        use rand_distr::{Distribution, StandardNormal};
        let eps1 = (0..self.dims.latent1)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let eps2 = (0..self.dims.latent2)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        (eps1, eps2)
    }
}
