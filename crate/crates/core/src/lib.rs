//! A self-contained laboratory for gradient-sign adversarial attacks on
//! small dense classifiers, evaluated with top-k rank metrics.
//!
//! The pieces, bottom to top:
//!
//! - [`nn`]: a deterministic dense-network engine with exact manual
//!   backpropagation from any logit-space gradient to an input gradient.
//! - [`data`]: seeded synthetic datasets (Gaussian blobs, grid patterns),
//!   class-imbalance subsampling, and image corruptions.
//! - [`losses`]: the attack loss family (`ce`, `ce-ll`, `cw`, `rce`,
//!   `rce-ll`, temperature-scaled `ce`, and the gradient-only `wce:<w>`
//!   probe) with closed-form logit gradients.
//! - [`attacks`]: FGSM, the least-likely-class step, and iterative
//!   gradient-sign attacks with momentum / input-diversity /
//!   gradient-smoothing regularizers under an L-infinity budget.
//! - [`metrics`]: interest-class rank, ASR@k, rank-movement metrics, logit
//!   cosine similarity, and logit-sum statistics.
//! - [`harness`]: end-to-end surrogate-to-target transfer experiments,
//!   parameter sweeps, probes, and report emission.

pub mod attacks;
pub mod data;
pub mod error;
pub mod harness;
pub mod losses;
pub mod metrics;
pub mod nn;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
