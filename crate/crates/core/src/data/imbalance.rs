//! Class-imbalance subsampling: linear per-class counts and the
//! exponential long-tail profile.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ImbalanceKind {
    /// Class `c` keeps `round(max_n - c * (max_n - min_n) / (K - 1))` samples.
    Linear { max_n: usize, min_n: usize },
    /// Long-tail profile: class `c` keeps `round(max_n * factor^(-c / (K - 1)))`
    /// where `max_n` is class 0's available count.
    Exponential { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSpec {
    #[serde(flatten)]
    pub kind: ImbalanceKind,
    pub seed: u64,
}

impl ImbalanceSpec {
    pub fn linear(max_n: usize, min_n: usize, seed: u64) -> Self {
        Self {
            kind: ImbalanceKind::Linear { max_n, min_n },
            seed,
        }
    }

    pub fn exponential(factor: f64, seed: u64) -> Self {
        Self {
            kind: ImbalanceKind::Exponential { factor },
            seed,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            ImbalanceKind::Linear { max_n, min_n } => format!("linear({max_n},{min_n})"),
            ImbalanceKind::Exponential { factor } => format!("exponential({factor})"),
        }
    }
}

/// Per-class target counts for a dataset with the given class-0 availability.
fn target_counts(kind: &ImbalanceKind, num_classes: usize, class0_n: usize) -> Result<Vec<usize>> {
    match *kind {
        ImbalanceKind::Linear { max_n, min_n } => {
            if min_n < 1 || max_n < min_n {
                return Err(Error::InvalidParameter(format!(
                    "linear imbalance requires max_n >= min_n >= 1, got ({max_n}, {min_n})"
                )));
            }
            Ok((0..num_classes)
                .map(|c| {
                    if num_classes == 1 {
                        max_n
                    } else {
                        let step = (max_n - min_n) as f64 / (num_classes - 1) as f64;
                        (max_n as f64 - c as f64 * step).round() as usize
                    }
                })
                .collect())
        }
        ImbalanceKind::Exponential { factor } => {
            if factor.is_nan() || factor < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "imbalance factor must be >= 1, got {factor}"
                )));
            }
            Ok((0..num_classes)
                .map(|c| {
                    if num_classes == 1 {
                        class0_n
                    } else {
                        let exponent = -(c as f64) / (num_classes - 1) as f64;
                        (class0_n as f64 * factor.powf(exponent)).round() as usize
                    }
                })
                .collect())
        }
    }
}

/// Downsamples per class to the profile in `spec`. The result is a subset of
/// the original samples in their original order; nothing is fabricated.
pub fn make_imbalanced(dataset: &Dataset, spec: &ImbalanceSpec) -> Result<Dataset> {
    let k = dataset.num_classes();
    let available = dataset.class_counts();
    let targets = target_counts(&spec.kind, k, available.first().copied().unwrap_or(0))?;
    for (c, (&want, &have)) in targets.iter().zip(&available).enumerate() {
        if want > have {
            return Err(Error::InvalidParameter(format!(
                "class {c}: requested {want} samples but only {have} available"
            )));
        }
    }
    let mut keep: Vec<usize> = Vec::new();
    for (c, &want) in targets.iter().enumerate() {
        let mut class_indices: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.label(i) == c)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(c as u64 + 1);
        class_indices.shuffle(&mut rng);
        class_indices.truncate(want);
        keep.extend(class_indices);
    }
    keep.sort_unstable();
    dataset.select(&keep)
}
