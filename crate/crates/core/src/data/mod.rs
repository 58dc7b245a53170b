//! Synthetic datasets, imbalance subsampling, and image corruptions.

pub mod dataset;
pub mod imbalance;
pub mod transform;

pub use dataset::{gen_blobs, gen_patterns, Dataset};
pub use imbalance::{make_imbalanced, ImbalanceKind, ImbalanceSpec};
pub use transform::{apply_transform, TransformKind, TransformSpec};
