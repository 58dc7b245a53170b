//! Pre-softmax logit vectors and temperature-scaled probability vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pre-softmax class scores, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitVector(Vec<f64>);

impl LogitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("logit vector"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("logit vector"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest entry; ties broken by the lower class index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Index of the smallest entry; ties broken by the lower class index.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v < self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Sum of all entries; the quantity probed by the zero-sum statistics.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for LogitVector {
    type Output = f64;
    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Post-softmax probabilities together with the temperature that produced
/// them (logits are divided by the temperature before exponentiation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    values: Vec<f64>,
    temperature: f64,
}

impl ProbVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, index: usize) -> &f64 {
        &self.values[index]
    }
}

/// Temperature-scaled softmax with max-subtraction for stability.
pub fn softmax(z: &LogitVector, temperature: f64) -> Result<ProbVector> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "softmax temperature must be positive and finite, got {temperature}"
        )));
    }
    let scaled: Vec<f64> = z.values().iter().map(|v| v / temperature).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(ProbVector {
        values: exps.iter().map(|e| e / total).collect(),
        temperature,
    })
}

/// Stable log-softmax at temperature 1, used by the loss values.
pub(crate) fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - max - log_sum).collect()
}
