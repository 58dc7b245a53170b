//! Image corruptions used by the robustness evaluation: brightness,
//! contrast, and Gaussian pixel noise. Every output is clamped back to the
//! valid pixel range.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TransformKind {
    None,
    /// Multiplies every pixel by `factor`.
    Brightness { factor: f64 },
    /// Scales deviations from the per-image mean by `factor`.
    Contrast { factor: f64 },
    /// Adds zero-mean Gaussian noise with the given standard deviation.
    GaussianNoise { std: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    pub seed: u64,
}

impl TransformSpec {
    pub fn none() -> Self {
        Self {
            kind: TransformKind::None,
            seed: 0,
        }
    }

    pub fn brightness(factor: f64) -> Self {
        Self {
            kind: TransformKind::Brightness { factor },
            seed: 0,
        }
    }

    pub fn contrast(factor: f64) -> Self {
        Self {
            kind: TransformKind::Contrast { factor },
            seed: 0,
        }
    }

    pub fn gaussian_noise(std: f64, seed: u64) -> Self {
        Self {
            kind: TransformKind::GaussianNoise { std },
            seed,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            TransformKind::None => "none".to_string(),
            TransformKind::Brightness { factor } => format!("brightness({factor})"),
            TransformKind::Contrast { factor } => format!("contrast({factor})"),
            TransformKind::GaussianNoise { std } => format!("gaussian-noise({std})"),
        }
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Applies the corruption to one sample; the result stays in `[0, 1]`.
pub fn apply_transform(x: &Tensor, spec: &TransformSpec) -> Result<Tensor> {
    match spec.kind {
        TransformKind::None => Ok(x.clone()),
        TransformKind::Brightness { factor } => {
            if factor.is_nan() || factor <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "brightness factor must be positive, got {factor}"
                )));
            }
            let data = x.data().iter().map(|&v| clamp01(v * factor)).collect();
            Tensor::new(x.shape().to_vec(), data)
        }
        TransformKind::Contrast { factor } => {
            if factor.is_nan() || factor <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "contrast factor must be positive, got {factor}"
                )));
            }
            // (v - m) + m is a ulp off from v; factor 1 must be the
            // identity map exactly.
            if factor == 1.0 {
                return Ok(x.clone());
            }
            let mean = x.data().iter().sum::<f64>() / x.len() as f64;
            let data = x
                .data()
                .iter()
                .map(|&v| clamp01((v - mean) * factor + mean))
                .collect();
            Tensor::new(x.shape().to_vec(), data)
        }
        TransformKind::GaussianNoise { std } => {
            if std.is_nan() || std < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise std must be non-negative, got {std}"
                )));
            }
            if std == 0.0 {
                return Ok(x.clone());
            }
            let normal =
                Normal::new(0.0, std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let data = x
                .data()
                .iter()
                .map(|&v| clamp01(v + normal.sample(&mut rng)))
                .collect();
            Tensor::new(x.shape().to_vec(), data)
        }
    }
}
