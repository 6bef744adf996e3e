//! Variational oversampling of imbalanced tabular datasets.
//!
//! The crate trains a two-stage latent-variable VAE on a labelled dataset,
//! samples synthetic minority-class rows from it, and benchmarks the
//! augmentation against SMOTE and ADASYN using downstream classifiers
//! (logistic regression and a small MLP) scored with ROC-family metrics.
//!
//! Layout:
//! - [`nn`]: dense networks, reverse-mode gradients, SGD
//! - [`data`]: dataset type, CSV ingestion, standardization, splitting
//! - [`vos`]: the generative model — ELBO, training, conditional sampling
//! - [`baselines`]: SMOTE and ADASYN reference oversamplers
//! - [`classifiers`]: weighted logistic regression and MLP
//! - [`eval`]: metrics, K-fold CV, architecture search, benchmark runner
//!
//! The `parallel` feature (on by default) runs batch inner loops on rayon;
//! results are bit-identical with and without it.

pub mod baselines;
pub mod classifiers;
pub mod data;
mod error;
pub mod eval;
pub mod linalg;
pub mod nn;
mod par;
pub mod rng;
pub mod vos;

pub use error::{Error, Result};
