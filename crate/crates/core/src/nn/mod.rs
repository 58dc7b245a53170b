//! Deterministic dense-network engine: forward passes to logits,
//! temperature softmax, training, checkpoints, and exact backpropagation
//! from a logit gradient to an input gradient.

pub mod checkpoint;
pub mod init;
pub mod logits;
pub mod model;
pub mod train;

pub use checkpoint::{load_model, model_from_json, model_to_json, save_model};
pub use init::{init_model, InitKind, InitScheme};
pub use logits::{softmax, LogitVector, ProbVector};
pub use model::{backprop_input, forward, Activation, DenseLayer, ForwardTrace, Model};
pub use train::{accuracy, dataset_logits, train, EpochStats, TrainConfig, TrainingLog};
