//! Gradient-sign attacks under an L-infinity budget.
//!
//! The iterative attack repeats: (optionally transform the current
//! adversarial input for the gradient pass) -> input gradient of the chosen
//! loss -> (optionally smooth the gradient) -> (optionally accumulate
//! momentum) -> signed step of size alpha -> project back into the
//! epsilon-ball around the clean input -> clamp to the valid pixel range.
//! Non-targeted attacks ascend the loss; targeted attacks descend it at the
//! target class. The perturbation starts at zero and there are no random
//! restarts.

pub mod regularizers;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{logit_gradient, InterestSpec, LossKind};
use crate::nn::model::{backprop_input, forward, Model};
use crate::tensor::Tensor;

pub use regularizers::{di_transform, ti_smooth, KernelSpec};

/// Everything that parameterizes one iterative attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// L-infinity budget in input units.
    pub epsilon: f64,
    /// Per-iteration step size.
    pub alpha: f64,
    /// Iteration count.
    pub steps: usize,
    pub loss: LossKind,
    pub targeted: bool,
    /// Momentum weight; 0 disables momentum accumulation.
    pub momentum_mu: f64,
    /// Probability of the pad-and-crop input transform; 0 disables it.
    pub di_prob: f64,
    /// Gradient-smoothing kernel; absent disables smoothing.
    pub ti_kernel: Option<KernelSpec>,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        // 16/255 budget with quarter-budget steps and 20 iterations.
        let epsilon = 16.0 / 255.0;
        Self {
            epsilon,
            alpha: epsilon / 4.0,
            steps: 20,
            loss: LossKind::Ce,
            targeted: false,
            momentum_mu: 0.0,
            di_prob: 0.0,
            ti_kernel: None,
            seed: 0,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if self.momentum_mu.is_nan() || self.momentum_mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "momentum weight must be non-negative, got {}",
                self.momentum_mu
            )));
        }
        if !(0.0..=1.0).contains(&self.di_prob) {
            return Err(Error::InvalidParameter(format!(
                "diversity probability must be in [0, 1], got {}",
                self.di_prob
            )));
        }
        if let Some(kernel) = &self.ti_kernel {
            kernel.matrix()?;
        }
        Ok(())
    }
}

/// L1 (mean absolute value over input dims), L2, and L-infinity norms of a
/// perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationNorms {
    pub l1_mean_abs: f64,
    pub l2: f64,
    pub linf: f64,
}

impl PerturbationNorms {
    pub fn of(delta: &[f64]) -> Self {
        let abs_sum: f64 = delta.iter().map(|v| v.abs()).sum();
        Self {
            l1_mean_abs: if delta.is_empty() {
                0.0
            } else {
                abs_sum / delta.len() as f64
            },
            l2: delta.iter().map(|v| v * v).sum::<f64>().sqrt(),
            linf: delta.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
        }
    }

    fn of_difference(clean: &Tensor, adversarial: &Tensor) -> Self {
        let delta: Vec<f64> = adversarial
            .data()
            .iter()
            .zip(clean.data())
            .map(|(a, c)| a - c)
            .collect();
        Self::of(&delta)
    }

    pub fn zero() -> Self {
        Self {
            l1_mean_abs: 0.0,
            l2: 0.0,
            linf: 0.0,
        }
    }
}

/// The crafted perturbation with its norm bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub delta: Tensor,
    pub l1_mean_abs: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Perturbation {
    pub fn between(clean: &Tensor, adversarial: &Tensor) -> Result<Self> {
        if clean.shape() != adversarial.shape() {
            return Err(Error::ShapeMismatch {
                context: "perturbation",
                expected: clean.shape().to_vec(),
                actual: adversarial.shape().to_vec(),
            });
        }
        let delta: Vec<f64> = adversarial
            .data()
            .iter()
            .zip(clean.data())
            .map(|(a, c)| a - c)
            .collect();
        let norms = PerturbationNorms::of(&delta);
        Ok(Self {
            delta: Tensor::new(clean.shape().to_vec(), delta)?,
            l1_mean_abs: norms.l1_mean_abs,
            l2: norms.l2,
            linf: norms.linf,
        })
    }

    pub fn norms(&self) -> PerturbationNorms {
        PerturbationNorms {
            l1_mean_abs: self.l1_mean_abs,
            l2: self.l2,
            linf: self.linf,
        }
    }
}

/// Result of one attack: the adversarial input itself, the perturbation,
/// and the per-iteration norm trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackRun {
    pub adversarial: Tensor,
    pub perturbation: Perturbation,
    pub step_norms: Vec<PerturbationNorms>,
}

/// sign with sign(0) = 0.
#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Clips `x_adv - x_clean` elementwise into `[-epsilon, epsilon]`, then
/// clamps the result to the valid pixel range `[0, 1]`.
pub fn project_linf(x_clean: &Tensor, x_adv: &Tensor, epsilon: f64) -> Result<Tensor> {
    if x_clean.shape() != x_adv.shape() {
        return Err(Error::ShapeMismatch {
            context: "linf projection",
            expected: x_clean.shape().to_vec(),
            actual: x_adv.shape().to_vec(),
        });
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let data: Vec<f64> = x_clean
        .data()
        .iter()
        .zip(x_adv.data())
        .map(|(c, a)| {
            let delta = (a - c).clamp(-epsilon, epsilon);
            (c + delta).clamp(0.0, 1.0)
        })
        .collect();
    Tensor::new(x_clean.shape().to_vec(), data)
}

fn run_iterations(
    model: &Model,
    x: &Tensor,
    interest: InterestSpec,
    config: &AttackConfig,
) -> Result<AttackRun> {
    config.validate()?;
    if config.targeted && interest.target_class.is_none() {
        return Err(Error::InvalidParameter(
            "targeted attack needs a target class".into(),
        ));
    }
    if config.di_prob > 0.0 && x.grid().is_none() {
        return Err(Error::GridRequired("input diversity in iterative attack"));
    }
    if config.ti_kernel.is_some() && x.grid().is_none() {
        return Err(Error::GridRequired("gradient smoothing in iterative attack"));
    }

    // The least-likely class is pinned from the clean logits for the whole
    // attack; the runner-up class j is re-resolved at every step inside
    // logit_gradient.
    let interest = match config.loss {
        LossKind::CeLl | LossKind::RceLl if interest.frozen_ll.is_none() => {
            let (clean_logits, _) = forward(model, x)?;
            interest.with_frozen_ll(clean_logits.argmin())
        }
        _ => interest,
    };

    let direction = if config.targeted { -1.0 } else { 1.0 };
    let mut x_adv = x.clone();
    let mut momentum = vec![0.0; x.len()];
    let mut step_norms = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        let grad_point = if config.di_prob > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(step as u64 + 1);
            regularizers::di_transform_with(&x_adv, config.di_prob, &mut rng)?
        } else {
            x_adv.clone()
        };
        let (logits, trace) = forward(model, &grad_point)?;
        let dl_dz = logit_gradient(config.loss, &logits, &interest)?;
        let mut grad = backprop_input(model, &trace, &dl_dz)?;
        if let Some(kernel) = &config.ti_kernel {
            grad = ti_smooth(&grad, kernel)?;
        }
        let update: &[f64] = if config.momentum_mu > 0.0 {
            let l1: f64 = grad.data().iter().map(|v| v.abs()).sum();
            for (m, g) in momentum.iter_mut().zip(grad.data()) {
                *m = config.momentum_mu * *m + if l1 > 0.0 { g / l1 } else { 0.0 };
            }
            &momentum
        } else {
            grad.data()
        };
        for (xi, ui) in x_adv.data_mut().iter_mut().zip(update) {
            *xi += direction * config.alpha * sign(*ui);
        }
        x_adv = project_linf(x, &x_adv, config.epsilon)?;
        step_norms.push(PerturbationNorms::of_difference(x, &x_adv));
    }
    let perturbation = Perturbation::between(x, &x_adv)?;
    Ok(AttackRun {
        adversarial: x_adv,
        perturbation,
        step_norms,
    })
}

/// Single gradient-sign step of size `epsilon` (the one-iteration instance
/// of the iterative attack). Ascends the loss, or descends it when
/// `interest` carries a target class.
pub fn fgsm(
    model: &Model,
    x: &Tensor,
    interest: InterestSpec,
    epsilon: f64,
    loss: LossKind,
) -> Result<Perturbation> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Perturbation::between(x, x);
    }
    let config = AttackConfig {
        epsilon,
        alpha: epsilon,
        steps: 1,
        loss,
        targeted: interest.target_class.is_some(),
        momentum_mu: 0.0,
        di_prob: 0.0,
        ti_kernel: None,
        seed: 0,
    };
    Ok(run_iterations(model, x, interest, &config)?.perturbation)
}

/// Single step toward the least-likely class of the clean prediction:
/// ascends `log p_LL` with the LL class frozen from the clean logits.
pub fn step_ll(model: &Model, x: &Tensor, epsilon: f64) -> Result<Perturbation> {
    let (clean_logits, _) = forward(model, x)?;
    let interest = InterestSpec::non_targeted(clean_logits.argmax())
        .with_frozen_ll(clean_logits.argmin());
    fgsm(model, x, interest, epsilon, LossKind::CeLl)
}

/// Iterative gradient-sign attack with the configured regularizers.
pub fn ifgsm(
    model: &Model,
    x: &Tensor,
    interest: InterestSpec,
    config: &AttackConfig,
) -> Result<AttackRun> {
    run_iterations(model, x, interest, config)
}
