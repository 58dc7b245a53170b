//! End-to-end experiment runners: surrogate-to-target transfer, parameter
//! sweeps, logit-sum probes, transformation robustness, and report
//! emission.
//!
//! Attacks are crafted with surrogate gradients only; target models enter
//! at the evaluation phase. All randomness flows from the spec seeds, with
//! per-sample streams derived from (seed, sample index) so results do not
//! depend on worker scheduling.

pub mod pool;
pub mod probes;
pub mod report;
pub mod sweeps;
pub mod transfer;

use serde::{Deserialize, Serialize};

use crate::attacks::AttackConfig;
use crate::data::{gen_blobs, gen_patterns, Dataset};
use crate::error::Result;
use crate::nn::{InitScheme, TrainConfig};

pub use probes::{
    run_transform_robustness, run_transform_robustness_prepared, run_zero_sum_probe,
    RobustnessRow, RobustnessTable, WeightCurve, ZeroSumProbeReport, ZeroSumProbeSpec, ZeroSumRow,
};
pub use report::{emit_report, write_norms_csv, write_records_jsonl, ReportFormat};
pub use sweeps::{
    run_alpha_t_sweep, run_temperature_sweep, SweepCell, SweepGrid, TemperatureRow,
    TemperatureSweep,
};
pub use transfer::{
    prepare, run_transfer, ExperimentReport, ModelReport, TransferContext, TransferOutcome,
};

/// Splitmix64-style mixing for deriving independent sub-seeds from a master
/// seed and a stream tag.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(tag.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// How to obtain the experiment's dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DatasetSpec {
    Blobs {
        classes: usize,
        dim: usize,
        n_per_class: usize,
        spread: f64,
        seed: u64,
    },
    Patterns {
        classes: usize,
        side: usize,
        n_per_class: usize,
        noise: f64,
        seed: u64,
    },
    /// JSON-lines file with one `{"input": [...], "label": n, "grid": ...}`
    /// record per sample.
    Jsonl { path: String },
}

impl DatasetSpec {
    pub fn build(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Blobs {
                classes,
                dim,
                n_per_class,
                spread,
                seed,
            } => gen_blobs(*classes, *dim, *n_per_class, *spread, *seed),
            DatasetSpec::Patterns {
                classes,
                side,
                n_per_class,
                noise,
                seed,
            } => gen_patterns(*classes, *side, *n_per_class, *noise, *seed),
            DatasetSpec::Jsonl { path } => {
                let file = std::fs::File::open(path)?;
                Dataset::from_jsonl(std::io::BufReader::new(file))
            }
        }
    }
}

/// Architecture plus initialization of one model in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub dims: Vec<usize>,
    pub init: InitScheme,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, init: InitScheme) -> Self {
        Self {
            name: name.into(),
            dims,
            init,
        }
    }
}

/// Full description of a transfer experiment: data, models, training, and
/// the attack. Surrogate and targets are trained on the same split; only
/// the surrogate's gradients are used for crafting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: DatasetSpec,
    /// Fraction of samples used to train the models; the rest are attacked.
    pub train_fraction: f64,
    pub surrogate: ModelSpec,
    pub targets: Vec<ModelSpec>,
    pub train: TrainConfig,
    pub attack: AttackConfig,
    /// Rank thresholds reported as ASR@k.
    pub ks: Vec<usize>,
    /// Cap on the number of attacked evaluation samples.
    pub max_eval_samples: Option<usize>,
    /// Master seed for the split, target-class draws, and per-sample streams.
    pub seed: u64,
    pub workers: usize,
}

impl ExperimentSpec {
    /// Desk-scale defaults: 10 classes of 8x8 patterns, a 64-32-10
    /// surrogate with 64-48-10 and 64-24-10 targets, a 16/255 budget with
    /// quarter-budget steps, and 20 iterations.
    pub fn desk_default(seed: u64) -> Self {
        Self {
            dataset: DatasetSpec::Patterns {
                classes: 10,
                side: 8,
                n_per_class: 60,
                noise: 0.1,
                seed: derive_seed(seed, 1),
            },
            train_fraction: 2.0 / 3.0,
            surrogate: ModelSpec::new(
                "surrogate-64-32-10",
                vec![64, 32, 10],
                InitScheme::kaiming_uniform(derive_seed(seed, 2)),
            ),
            targets: vec![
                ModelSpec::new(
                    "target-64-48-10",
                    vec![64, 48, 10],
                    InitScheme::kaiming_uniform(derive_seed(seed, 3)),
                ),
                ModelSpec::new(
                    "target-64-24-10",
                    vec![64, 24, 10],
                    InitScheme::kaiming_uniform(derive_seed(seed, 4)),
                ),
            ],
            train: TrainConfig {
                epochs: 500,
                learning_rate: 0.1,
                batch_size: 32,
                weight_decay: 0.001,
                holdout_fraction: 0.2,
                seed: derive_seed(seed, 5),
            },
            attack: AttackConfig {
                seed: derive_seed(seed, 6),
                ..AttackConfig::default()
            },
            ks: vec![1, 5],
            max_eval_samples: Some(200),
            seed,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if !(0.0..1.0).contains(&self.train_fraction) || self.train_fraction == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.attack.epsilon > 0.0 {
            self.attack.validate()?;
        }
        Ok(())
    }
}
