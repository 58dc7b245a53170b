//! Deterministic weight initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::model::{Activation, DenseLayer, Model};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitKind {
    Gaussian { mean: f64, std: f64 },
    KaimingUniform,
}

/// Initialization recipe: distribution plus the seed that makes it
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitScheme {
    #[serde(flatten)]
    pub kind: InitKind,
    pub seed: u64,
}

impl InitScheme {
    pub fn gaussian(mean: f64, std: f64, seed: u64) -> Self {
        Self {
            kind: InitKind::Gaussian { mean, std },
            seed,
        }
    }

    pub fn kaiming_uniform(seed: u64) -> Self {
        Self {
            kind: InitKind::KaimingUniform,
            seed,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            InitKind::Gaussian { mean, std } => format!("gaussian({mean},{std})"),
            InitKind::KaimingUniform => "kaiming-uniform".to_string(),
        }
    }
}

/// Builds a dense model for the layer sizes in `dims` (input first, classes
/// last): ReLU on hidden layers, identity on the output layer. The same
/// scheme and seed always produce a bit-identical model.
pub fn init_model(dims: &[usize], scheme: &InitScheme) -> Result<Model> {
    if dims.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "model dims need at least an input and an output size, got {dims:?}"
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "model dims must be positive, got {dims:?}"
        )));
    }
    if let InitKind::Gaussian { std, .. } = scheme.kind {
        if std.is_nan() || std <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian init std must be positive, got {std}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scheme.seed);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (i, pair) in dims.windows(2).enumerate() {
        let (in_dim, out_dim) = (pair[0], pair[1]);
        let is_last = i + 2 == dims.len();
        let activation = if is_last {
            Activation::Identity
        } else {
            Activation::Relu
        };
        let (weights, bias) = match scheme.kind {
            InitKind::Gaussian { mean, std } => {
                let normal = Normal::new(mean, std)
                    .map_err(|e| Error::InvalidParameter(format!("gaussian init: {e}")))?;
                let w: Vec<f64> = (0..out_dim * in_dim)
                    .map(|_| normal.sample(&mut rng))
                    .collect();
                let b: Vec<f64> = (0..out_dim).map(|_| normal.sample(&mut rng)).collect();
                (w, b)
            }
            InitKind::KaimingUniform => {
                let bound = (6.0 / in_dim as f64).sqrt();
                let w: Vec<f64> = (0..out_dim * in_dim)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                (w, vec![0.0; out_dim])
            }
        };
        layers.push(DenseLayer::new(
            Tensor::new(vec![out_dim, in_dim], weights)?,
            bias,
            activation,
        )?);
    }
    Ok(Model::new(layers)?.with_init_seed(scheme.seed))
}
