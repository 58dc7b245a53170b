//! Minibatch gradient-descent training driven by a pluggable logit-space
//! gradient.
//!
//! The trainer is deliberately plain (no momentum, no adaptive steps): the
//! update is `theta -= lr * (grad + weight_decay * theta)`. The loss enters
//! only through `grad_fn`, which maps `(logits, label)` to dL/dZ; this is
//! what lets the logit-sum probes swap in the `w`-weighted gradient
//! `w*P - Y` without touching the engine. The per-epoch log always records
//! the cross-entropy `-log p_label` as its loss monitor, since gradient-only
//! objectives have no scalar value of their own.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::logits::{log_softmax, LogitVector};
use crate::nn::model::{accumulate_param_gradients, forward, Model, ParamGradients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// L2 penalty coefficient; 0 disables it.
    pub weight_decay: f64,
    /// Fraction of samples held out for the per-epoch logit-sum statistic.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            learning_rate: 0.3,
            batch_size: 32,
            weight_decay: 0.0,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Mean cross-entropy over the training pass (monitoring quantity).
    pub mean_loss: f64,
    /// Training accuracy over the epoch's pass.
    pub accuracy: f64,
    /// Mean logit sum over the held-out split at the end of the epoch.
    pub holdout_mean_logit_sum: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    pub fn final_accuracy(&self) -> f64 {
        self.epochs.last().map(|e| e.accuracy).unwrap_or(0.0)
    }

    /// Per-epoch held-out mean logit sums, in order.
    pub fn logit_sum_curve(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.holdout_mean_logit_sum).collect()
    }
}

/// Trains a copy of `model` on `data` and returns it with the per-epoch log.
/// Deterministic: the same model, data, and config give a bit-identical
/// result.
pub fn train<F>(
    model: &Model,
    data: &Dataset,
    config: &TrainConfig,
    grad_fn: F,
) -> Result<(Model, TrainingLog)>
where
    F: Fn(&LogitVector, usize) -> LogitVector,
{
    if data.is_empty() {
        return Err(Error::EmptyInput("training dataset"));
    }
    if data.input_dim() != model.input_dim() {
        return Err(Error::ShapeMismatch {
            context: "training inputs",
            expected: vec![model.input_dim()],
            actual: vec![data.input_dim()],
        });
    }
    if let Some(&bad) = data.labels().iter().find(|&&l| l >= model.num_classes()) {
        return Err(Error::InvalidParameter(format!(
            "label {bad} out of range for model with {} classes",
            model.num_classes()
        )));
    }
    if !config.learning_rate.is_finite() || config.learning_rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be non-negative, got {}",
            config.learning_rate
        )));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be positive".into()));
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction must be in [0, 1), got {}",
            config.holdout_fraction
        )));
    }

    // Fixed holdout split, independent of the epoch shuffles.
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut split_rng = ChaCha8Rng::seed_from_u64(config.seed);
    indices.shuffle(&mut split_rng);
    let holdout_len = ((data.len() as f64) * config.holdout_fraction).floor() as usize;
    let (train_idx, holdout_idx) = indices.split_at(data.len() - holdout_len);
    let train_idx = train_idx.to_vec();
    let holdout_idx: &[usize] = if holdout_idx.is_empty() {
        &train_idx
    } else {
        holdout_idx
    };

    let mut trained = model.clone();
    let mut log = TrainingLog::default();
    for epoch in 0..config.epochs {
        let mut order = train_idx.clone();
        let mut epoch_rng = ChaCha8Rng::seed_from_u64(config.seed);
        epoch_rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut epoch_rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let mut grads = ParamGradients::zeros(&trained);
            for &i in batch {
                let x = data.input(i);
                let label = data.label(i);
                let (logits, trace) = forward(&trained, x).map_err(|e| match e {
                    Error::NonFinite(_) => Error::TrainingDiverged(format!(
                        "non-finite activations at epoch {epoch}, sample {i}"
                    )),
                    other => other,
                })?;
                loss_sum += -log_softmax(logits.values())[label];
                if logits.argmax() == label {
                    correct += 1;
                }
                let grad = grad_fn(&logits, label);
                accumulate_param_gradients(&trained, &trace, &grad, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            let layers = trained.layers_mut();
            for (idx, layer) in layers.iter_mut().enumerate() {
                layer.apply_update(
                    &grads.weights[idx],
                    &grads.bias[idx],
                    config.learning_rate,
                    config.weight_decay,
                );
            }
        }

        let mean_loss = loss_sum / train_idx.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "loss became {mean_loss} at epoch {epoch}"
            )));
        }
        let mut sum_z = 0.0;
        for &i in holdout_idx {
            let (logits, _) = forward(&trained, data.input(i))?;
            sum_z += logits.sum();
        }
        log.epochs.push(EpochStats {
            mean_loss,
            accuracy: correct as f64 / train_idx.len() as f64,
            holdout_mean_logit_sum: sum_z / holdout_idx.len() as f64,
        });
    }
    Ok((trained, log))
}

/// Fraction of samples whose top-1 prediction matches the label.
pub fn accuracy(model: &Model, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("accuracy dataset"));
    }
    let mut correct = 0usize;
    for (input, &label) in data.inputs().iter().zip(data.labels()) {
        let (logits, _) = forward(model, input)?;
        if logits.argmax() == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Logits of every sample, in dataset order.
pub fn dataset_logits(model: &Model, data: &Dataset) -> Result<Vec<LogitVector>> {
    data.inputs()
        .iter()
        .map(|x| forward(model, x).map(|(z, _)| z))
        .collect()
}
