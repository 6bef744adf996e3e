//! SMOTE and ADASYN reference oversamplers.

mod adasyn;
mod knn;
mod smote;

pub use adasyn::{adasyn, AdasynConfig, AdasynOutput};
pub use knn::k_nearest;
pub use smote::{smote, SmoteConfig, SmoteOrigin, SmoteOutput};
