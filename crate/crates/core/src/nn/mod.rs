//! Dense-network substrate: affine layers, activations, reverse-mode
//! gradients, and the SGD optimizer every model in the crate trains with.

mod activation;
mod dense;
mod optimizer;

pub use activation::{sigmoid, softplus, Activation};
pub use dense::{DenseNet, ForwardTrace, GradientTape, Layer, LayerGrad};
pub use optimizer::{sgd_step, TrainConfig};
