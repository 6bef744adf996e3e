//! Downstream classifiers used to score oversampling quality.

mod logreg;
mod mlp;

pub use logreg::{logreg_fit, LogRegConfig, LogRegModel};
pub use mlp::{mlp_clf_fit, MlpClassifier, MlpConfig};
