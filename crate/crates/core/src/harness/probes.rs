//! Training-time probes of the logit-sum balance and the robustness of
//! adversarial examples to image corruptions.

use serde::{Deserialize, Serialize};

use crate::attacks::{ifgsm, AttackConfig};
use crate::data::{apply_transform, make_imbalanced, Dataset, ImbalanceSpec, TransformSpec};
use crate::error::{Error, Result};
use crate::harness::transfer::{prepare, TransferContext};
use crate::harness::{derive_seed, pool, DatasetSpec, ExperimentSpec};
use crate::losses::{logit_gradient, InterestSpec, LossKind};
use crate::metrics::{class_rank, zero_sum_stats, ZeroSumStats};
use crate::nn::{dataset_logits, forward, init_model, train, InitScheme, LogitVector, TrainConfig};
use crate::tensor::Tensor;

/// Grid of logit-sum experiments: every (architecture, init, imbalance)
/// combination is trained with cross-entropy and measured on clean and
/// adversarial validation logits; separately, the `w`-weighted gradient
/// `w*P - Y` is trained for each `w` to trace the induced logit-sum drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumProbeSpec {
    pub dataset: DatasetSpec,
    pub train_fraction: f64,
    pub architectures: Vec<Vec<usize>>,
    pub init_schemes: Vec<InitScheme>,
    /// `None` entries keep the dataset balanced.
    pub imbalance: Vec<Option<ImbalanceSpec>>,
    pub w_values: Vec<f64>,
    pub train: TrainConfig,
    pub attack: AttackConfig,
    pub seed: u64,
}

impl ZeroSumProbeSpec {
    pub fn desk_default(seed: u64) -> Self {
        Self {
            dataset: DatasetSpec::Patterns {
                classes: 10,
                side: 8,
                n_per_class: 60,
                noise: 0.1,
                seed: derive_seed(seed, 21),
            },
            train_fraction: 2.0 / 3.0,
            architectures: vec![vec![64, 32, 10]],
            init_schemes: vec![InitScheme::gaussian(0.0, 1.0, derive_seed(seed, 22))],
            imbalance: vec![None],
            w_values: vec![0.9, 1.0, 1.1],
            // Long enough at this decay for the init's output-layer column
            // sums to wash out regardless of where they start, including on
            // the downsampled imbalanced variants with few batches per epoch.
            train: TrainConfig {
                epochs: 4000,
                learning_rate: 0.1,
                batch_size: 16,
                weight_decay: 0.005,
                holdout_fraction: 0.2,
                seed: derive_seed(seed, 23),
            },
            attack: AttackConfig {
                seed: derive_seed(seed, 24),
                ..AttackConfig::default()
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumRow {
    pub architecture: String,
    pub init: String,
    pub imbalance: String,
    pub accuracy: f64,
    pub clean: ZeroSumStats,
    pub adversarial: ZeroSumStats,
}

/// Held-out mean logit sum after each epoch of training with `w*P - Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCurve {
    pub w: f64,
    pub epoch_mean_logit_sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumProbeReport {
    pub rows: Vec<ZeroSumRow>,
    pub w_curves: Vec<WeightCurve>,
}

fn dims_label(dims: &[usize]) -> String {
    dims.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_len = ((data.len() as f64) * fraction).round() as usize;
    if train_len == 0 || train_len >= data.len() {
        return Err(Error::InvalidParameter(format!(
            "fraction {fraction} leaves an empty split"
        )));
    }
    let (a, b) = indices.split_at(train_len);
    Ok((data.select(a)?, data.select(b)?))
}

pub fn run_zero_sum_probe(spec: &ZeroSumProbeSpec) -> Result<ZeroSumProbeReport> {
    let base_data = spec.dataset.build()?;
    let grad_for = |kind: LossKind| {
        move |z: &LogitVector, label: usize| {
            logit_gradient(kind, z, &InterestSpec::non_targeted(label)).expect("training gradient")
        }
    };

    let mut rows = Vec::new();
    for imbalance in &spec.imbalance {
        let data = match imbalance {
            Some(im) => make_imbalanced(&base_data, im)?,
            None => base_data.clone(),
        };
        let (train_split, val_split) =
            split(&data, spec.train_fraction, derive_seed(spec.seed, 31))?;
        for dims in &spec.architectures {
            for scheme in &spec.init_schemes {
                let model = init_model(dims, scheme)?;
                let (trained, log) =
                    train(&model, &train_split, &spec.train, grad_for(LossKind::Ce))?;
                let clean_logits = dataset_logits(&trained, &val_split)?;
                let adv_logits: Vec<Result<LogitVector>> =
                    pool::parallel_map(val_split.inputs(), 1, |i, x| {
                        let config = AttackConfig {
                            seed: derive_seed(spec.attack.seed, i as u64),
                            ..spec.attack.clone()
                        };
                        let run = ifgsm(
                            &trained,
                            x,
                            InterestSpec::non_targeted(val_split.label(i)),
                            &config,
                        )?;
                        Ok(forward(&trained, &run.adversarial)?.0)
                    });
                let adv_logits: Vec<LogitVector> = adv_logits.into_iter().collect::<Result<_>>()?;
                rows.push(ZeroSumRow {
                    architecture: dims_label(dims),
                    init: scheme.label(),
                    imbalance: imbalance
                        .as_ref()
                        .map(|im| im.label())
                        .unwrap_or_else(|| "balanced".to_string()),
                    accuracy: log.final_accuracy(),
                    clean: zero_sum_stats(&clean_logits)?,
                    adversarial: zero_sum_stats(&adv_logits)?,
                });
            }
        }
    }

    // The drift probe isolates the loss-gradient effect, so it trains
    // without the L2 penalty and from a mild fixed init.
    let mut w_curves = Vec::with_capacity(spec.w_values.len());
    if !spec.w_values.is_empty() {
        let (train_split, _) = split(&base_data, spec.train_fraction, derive_seed(spec.seed, 31))?;
        let dims = spec
            .architectures
            .first()
            .ok_or(Error::EmptyInput("probe architectures"))?;
        let probe_init = InitScheme::gaussian(0.0, 0.1, derive_seed(spec.seed, 32));
        let probe_train = TrainConfig {
            weight_decay: 0.0,
            ..spec.train
        };
        for &w in &spec.w_values {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "w must be positive, got {w}"
                )));
            }
            let model = init_model(dims, &probe_init)?;
            let (_, log) = train(&model, &train_split, &probe_train, grad_for(LossKind::Wce(w)))?;
            w_curves.push(WeightCurve {
                w,
                epoch_mean_logit_sum: log.logit_sum_curve(),
            });
        }
    }

    Ok(ZeroSumProbeReport { rows, w_curves })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub transform: String,
    pub mean_icr: f64,
}

/// White-box mean ICR of the crafted adversarial examples after each image
/// corruption. The first row is always the uncorrupted baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub loss: LossKind,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessTable {
    pub fn base_mean_icr(&self) -> f64 {
        self.rows[0].mean_icr
    }

    pub fn row(&self, label: &str) -> Option<&RobustnessRow> {
        self.rows.iter().find(|r| r.transform == label)
    }
}

/// Crafts white-box adversarial examples once, then re-evaluates the
/// interest-class rank after each transform.
pub fn run_transform_robustness(
    spec: &ExperimentSpec,
    transforms: &[TransformSpec],
) -> Result<RobustnessTable> {
    let ctx = prepare(spec)?;
    run_transform_robustness_prepared(&ctx, &spec.attack, transforms)
}

/// Same as [`run_transform_robustness`] but on an existing context, so one
/// set of trained models can serve several attack losses.
pub fn run_transform_robustness_prepared(
    ctx: &TransferContext,
    attack: &AttackConfig,
    transforms: &[TransformSpec],
) -> Result<RobustnessTable> {
    if ctx.eval_split.grid().is_none() {
        return Err(Error::GridRequired("transform robustness"));
    }
    attack.validate()?;
    let eval = &ctx.eval_split;
    let adversarial: Vec<Result<Tensor>> =
        pool::parallel_map(eval.inputs(), ctx.spec.workers, |i, x| {
            let config = AttackConfig {
                seed: derive_seed(attack.seed, i as u64),
                ..attack.clone()
            };
            Ok(ifgsm(&ctx.surrogate, x, ctx.interests[i], &config)?.adversarial)
        });
    let adversarial: Vec<Tensor> = adversarial.into_iter().collect::<Result<_>>()?;

    let mean_icr_of = |inputs: &[Tensor]| -> Result<f64> {
        let mut total = 0usize;
        for (i, x) in inputs.iter().enumerate() {
            let (logits, _) = forward(&ctx.surrogate, x)?;
            total += class_rank(&logits, ctx.interests[i].interest_class())?;
        }
        Ok(total as f64 / inputs.len() as f64)
    };

    let mut rows = vec![RobustnessRow {
        transform: "base".to_string(),
        mean_icr: mean_icr_of(&adversarial)?,
    }];
    for transform in transforms {
        let corrupted: Vec<Tensor> = adversarial
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let per_sample = TransformSpec {
                    seed: derive_seed(transform.seed, i as u64),
                    ..*transform
                };
                apply_transform(x, &per_sample)
            })
            .collect::<Result<_>>()?;
        rows.push(RobustnessRow {
            transform: transform.label(),
            mean_icr: mean_icr_of(&corrupted)?,
        });
    }
    Ok(RobustnessTable {
        loss: attack.loss,
        rows,
    })
}
