//! Surrogate-to-target transfer runs: train the models once, craft
//! adversarial examples on the surrogate, evaluate every metric on the
//! surrogate and each target.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attacks::{ifgsm, AttackConfig, PerturbationNorms};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::harness::{derive_seed, pool, ExperimentSpec};
use crate::losses::{logit_gradient, InterestSpec, LossKind};
use crate::metrics::{self, SampleRecord};
use crate::nn::{forward, init_model, train, LogitVector, Model, TrainingLog};
use crate::tensor::Tensor;

/// Aggregated metrics for one model over the attacked evaluation set.
/// Means are taken over all attacked samples; per-record correctness flags
/// allow recomputing any metric over the surrogate-correct subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub clean_accuracy: f64,
    pub mean_icr: f64,
    /// `(k, ASR@k)` pairs in the spec's `ks` order.
    pub asr: Vec<(usize, f64)>,
    pub mean_olnr: f64,
    pub mean_nlor: f64,
    pub mean_nrt: f64,
    pub mean_cossim: f64,
    pub mean_norms: PerturbationNorms,
}

/// One transfer experiment's results: the white-box row first, then one
/// row per target model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub spec: ExperimentSpec,
    pub rows: Vec<ModelReport>,
    /// Mean perturbation norms after each attack iteration.
    pub step_norms: Vec<PerturbationNorms>,
}

pub const REPORT_SCHEMA: &str = "advrank-report-v1";

/// Report plus the per-sample records behind it, keyed by model name.
#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub report: ExperimentReport,
    pub records: Vec<(String, Vec<SampleRecord>)>,
}

/// Trained models and the evaluation split, reusable across attack
/// configurations (sweeps retrain nothing).
pub struct TransferContext {
    pub spec: ExperimentSpec,
    pub surrogate: Model,
    pub surrogate_log: TrainingLog,
    pub targets: Vec<(String, Model)>,
    pub train_split: Dataset,
    pub eval_split: Dataset,
    /// Per-sample attack interest, fixed up front: ground truth, plus a
    /// seeded pseudo-random target class (never the ground truth) for
    /// targeted runs.
    pub interests: Vec<InterestSpec>,
}

fn ce_grad(z: &LogitVector, label: usize) -> LogitVector {
    logit_gradient(LossKind::Ce, z, &InterestSpec::non_targeted(label))
        .expect("cross-entropy gradient")
}

/// Builds the dataset, splits it, and trains the surrogate and targets on
/// the same training split.
pub fn prepare(spec: &ExperimentSpec) -> Result<TransferContext> {
    spec.validate()?;
    let data = spec.dataset.build()?;
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0x591f));
    indices.shuffle(&mut rng);
    let train_len = ((data.len() as f64) * spec.train_fraction).round() as usize;
    if train_len == 0 || train_len >= data.len() {
        return Err(Error::InvalidParameter(format!(
            "train fraction {} leaves no training or evaluation samples",
            spec.train_fraction
        )));
    }
    let (train_idx, eval_idx) = indices.split_at(train_len);
    let train_split = data.select(train_idx)?;
    let mut eval_idx = eval_idx.to_vec();
    if let Some(cap) = spec.max_eval_samples {
        eval_idx.truncate(cap);
    }
    let eval_split = data.select(&eval_idx)?;

    let train_one = |model_spec: &crate::harness::ModelSpec| -> Result<(Model, TrainingLog)> {
        let init = init_model(&model_spec.dims, &model_spec.init)?;
        train(&init, &train_split, &spec.train, ce_grad)
    };
    let (surrogate, surrogate_log) = train_one(&spec.surrogate)?;
    let mut targets = Vec::with_capacity(spec.targets.len());
    for target_spec in &spec.targets {
        let (model, _) = train_one(target_spec)?;
        targets.push((target_spec.name.clone(), model));
    }

    let k = data.num_classes();
    let interests: Vec<InterestSpec> = (0..eval_split.len())
        .map(|i| {
            let gt = eval_split.label(i);
            if spec.attack.targeted {
                let mut trng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0x7a6));
                trng.set_stream(i as u64 + 1);
                let draw = trng.random_range(0..k - 1);
                let target = if draw >= gt { draw + 1 } else { draw };
                InterestSpec::targeted(gt, target)
            } else {
                InterestSpec::non_targeted(gt)
            }
        })
        .collect();

    Ok(TransferContext {
        spec: spec.clone(),
        surrogate,
        surrogate_log,
        targets,
        train_split,
        eval_split,
        interests,
    })
}

struct SampleOutcome {
    adversarial: Tensor,
    norms: PerturbationNorms,
    step_norms: Vec<PerturbationNorms>,
}

/// Crafts and evaluates one attack configuration against the prepared
/// models. An `epsilon` of 0 is the no-attack control: the adversarial
/// input is the clean input.
pub fn run_cell(ctx: &TransferContext, attack: &AttackConfig) -> Result<TransferOutcome> {
    if attack.epsilon > 0.0 {
        attack.validate()?;
    }
    let eval = &ctx.eval_split;
    let crafted: Vec<Result<SampleOutcome>> =
        pool::parallel_map(eval.inputs(), ctx.spec.workers, |i, x| {
            if attack.epsilon == 0.0 {
                return Ok(SampleOutcome {
                    adversarial: x.clone(),
                    norms: PerturbationNorms::zero(),
                    step_norms: Vec::new(),
                });
            }
            let per_sample = AttackConfig {
                seed: derive_seed(attack.seed, i as u64),
                ..attack.clone()
            };
            let run = ifgsm(&ctx.surrogate, x, ctx.interests[i], &per_sample)?;
            Ok(SampleOutcome {
                adversarial: run.adversarial,
                norms: run.perturbation.norms(),
                step_norms: run.step_norms,
            })
        });
    let crafted: Vec<SampleOutcome> = crafted.into_iter().collect::<Result<_>>()?;

    let mut models: Vec<(&str, &Model)> = vec![(ctx.spec.surrogate.name.as_str(), &ctx.surrogate)];
    for (name, model) in &ctx.targets {
        models.push((name.as_str(), model));
    }

    let mut records: Vec<(String, Vec<SampleRecord>)> = Vec::with_capacity(models.len());
    let mut surrogate_correct = vec![false; eval.len()];
    for (model_idx, (name, model)) in models.iter().enumerate() {
        let mut model_records = Vec::with_capacity(eval.len());
        for (i, outcome) in crafted.iter().enumerate() {
            let (clean_logits, _) = forward(model, eval.input(i))?;
            let (adv_logits, _) = forward(model, &outcome.adversarial)?;
            if model_idx == 0 {
                surrogate_correct[i] = clean_logits.argmax() == eval.label(i);
            }
            model_records.push(SampleRecord::new(
                clean_logits,
                adv_logits,
                eval.label(i),
                ctx.interests[i].target_class,
                outcome.norms,
                surrogate_correct[i],
            )?);
        }
        records.push((name.to_string(), model_records));
    }

    let rows: Vec<ModelReport> = records
        .iter()
        .map(|(name, recs)| aggregate_row(name, recs, &ctx.spec.ks))
        .collect::<Result<_>>()?;

    let steps = crafted.first().map(|c| c.step_norms.len()).unwrap_or(0);
    let mut step_norms = Vec::with_capacity(steps);
    for step in 0..steps {
        let n = crafted.len() as f64;
        step_norms.push(PerturbationNorms {
            l1_mean_abs: crafted.iter().map(|c| c.step_norms[step].l1_mean_abs).sum::<f64>() / n,
            l2: crafted.iter().map(|c| c.step_norms[step].l2).sum::<f64>() / n,
            linf: crafted.iter().map(|c| c.step_norms[step].linf).sum::<f64>() / n,
        });
    }

    let mut spec = ctx.spec.clone();
    spec.attack = attack.clone();
    Ok(TransferOutcome {
        report: ExperimentReport {
            schema: REPORT_SCHEMA.to_string(),
            spec,
            rows,
            step_norms,
        },
        records,
    })
}

fn aggregate_row(name: &str, records: &[SampleRecord], ks: &[usize]) -> Result<ModelReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("model records"));
    }
    let n = records.len() as f64;
    let targeted = records[0].target_class.is_some();
    let clean_accuracy = records
        .iter()
        .filter(|r| r.clean_pred == r.gt_class)
        .count() as f64
        / n;
    let mut asr = Vec::with_capacity(ks.len());
    for &k in ks {
        asr.push((k, metrics::asr_at_k(records, k, targeted)?));
    }
    let mean = |f: &dyn Fn(&SampleRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let mut mean_cossim = 0.0;
    for record in records {
        mean_cossim += metrics::logit_cosine(record)?;
    }
    Ok(ModelReport {
        model: name.to_string(),
        clean_accuracy,
        mean_icr: metrics::mean_icr(records),
        asr,
        mean_olnr: mean(&|r| metrics::olnr(r) as f64),
        mean_nlor: mean(&|r| metrics::nlor(r) as f64),
        mean_nrt: mean(&metrics::nrt),
        mean_cossim: mean_cossim / n,
        mean_norms: PerturbationNorms {
            l1_mean_abs: mean(&|r| r.norms.l1_mean_abs),
            l2: mean(&|r| r.norms.l2),
            linf: mean(&|r| r.norms.linf),
        },
    })
}

/// Full transfer experiment: prepare the models, then run the spec's attack.
pub fn run_transfer(spec: &ExperimentSpec) -> Result<TransferOutcome> {
    let ctx = prepare(spec)?;
    run_cell(&ctx, &spec.attack)
}
