//! Dense feedforward classifier with exact manual backpropagation.
//!
//! The network is a chain of affine layers with ReLU or identity
//! activations; the last layer is always identity so the outputs are
//! pre-softmax logits. A forward pass returns a [`ForwardTrace`] holding the
//! per-layer pre/post activations, which makes the backward passes exact for
//! this piecewise-linear function class (the ReLU subgradient at 0 is 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::logits::LogitVector;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Identity => x,
        }
    }

    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::InvalidParameter(format!(
                "unknown activation '{other}' (expected 'relu' or 'identity')"
            ))),
        }
    }
}

/// Affine layer `y = act(W x + b)` with `W` of shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    weights: Tensor,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let shape = weights.shape();
        if shape.len() != 2 {
            return Err(Error::ShapeMismatch {
                context: "dense layer weights",
                expected: vec![2],
                actual: vec![shape.len()],
            });
        }
        if shape[0] != bias.len() {
            return Err(Error::ShapeMismatch {
                context: "dense layer bias",
                expected: vec![shape[0]],
                actual: vec![bias.len()],
            });
        }
        if !bias.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense layer bias"));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn affine(&self, input: &[f64], pre: &mut [f64]) {
        let (out_dim, in_dim) = (self.out_dim(), self.in_dim());
        let w = self.weights.data();
        for o in 0..out_dim {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            let mut acc = self.bias[o];
            for (wi, xi) in row.iter().zip(input) {
                acc += wi * xi;
            }
            pre[o] = acc;
        }
    }

    pub(crate) fn apply_update(&mut self, dw: &[f64], db: &[f64], lr: f64, weight_decay: f64) {
        let w = self.weights.data_mut();
        for (wi, gi) in w.iter_mut().zip(dw) {
            *wi -= lr * (gi + weight_decay * *wi);
        }
        for (bi, gi) in self.bias.iter_mut().zip(db) {
            *bi -= lr * (gi + weight_decay * *bi);
        }
    }
}

/// Dense feedforward classifier. Immutable once trained; every weight
/// mutation bumps `version` so stale forward traces can be rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    layers: Vec<DenseLayer>,
    input_dim: usize,
    num_classes: usize,
    version: u64,
    init_seed: Option<u64>,
}

impl Model {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        let first = layers.first().ok_or(Error::EmptyInput("model layers"))?;
        let input_dim = first.in_dim();
        let mut prev_out = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() != prev_out {
                return Err(Error::ShapeMismatch {
                    context: "model layer chain",
                    expected: vec![prev_out],
                    actual: vec![layer.in_dim()],
                });
            }
            prev_out = layer.out_dim();
            let is_last = i + 1 == layers.len();
            if is_last && layer.activation() != Activation::Identity {
                return Err(Error::InvalidParameter(
                    "final layer must use the identity activation (outputs are logits)".into(),
                ));
            }
        }
        Ok(Self {
            layers,
            input_dim,
            num_classes: prev_out,
            version: 0,
            init_seed: None,
        })
    }

    pub(crate) fn with_init_seed(mut self, seed: u64) -> Self {
        self.init_seed = Some(seed);
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Seed of the initialization that produced this model, when known.
    pub fn init_seed(&self) -> Option<u64> {
        self.init_seed
    }

    /// Layer dimensions as `[input_dim, hidden..., num_classes]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim()));
        dims
    }

    /// Mutable layer access; invalidates outstanding forward traces.
    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.version += 1;
        &mut self.layers
    }
}

/// Per-layer activations cached by a forward pass, sufficient to backprop an
/// arbitrary logit gradient to the input or the parameters.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Tensor,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    model_version: u64,
}

impl ForwardTrace {
    pub fn input(&self) -> &Tensor {
        &self.input
    }

    pub fn num_layers(&self) -> usize {
        self.pre.len()
    }

    /// Smallest |pre-activation| across the ReLU layers of `model`, or
    /// infinity when there are none. Gradient verification uses this to
    /// keep finite-difference probes away from the activation kinks.
    pub fn relu_margin(&self, model: &Model) -> f64 {
        let mut margin = f64::INFINITY;
        for (layer, pre) in model.layers.iter().zip(&self.pre) {
            if layer.activation() == Activation::Relu {
                for &p in pre {
                    margin = margin.min(p.abs());
                }
            }
        }
        margin
    }
}

/// Forward pass to the logits, returning the trace needed for backprop.
pub fn forward(model: &Model, x: &Tensor) -> Result<(LogitVector, ForwardTrace)> {
    if x.len() != model.input_dim() {
        return Err(Error::ShapeMismatch {
            context: "model input",
            expected: vec![model.input_dim()],
            actual: vec![x.len()],
        });
    }
    let mut pre = Vec::with_capacity(model.layers.len());
    let mut post = Vec::with_capacity(model.layers.len());
    let mut current: Vec<f64> = x.data().to_vec();
    for layer in &model.layers {
        let mut z = vec![0.0; layer.out_dim()];
        layer.affine(&current, &mut z);
        let activated: Vec<f64> = z.iter().map(|&v| layer.activation().apply(v)).collect();
        pre.push(z);
        current = activated.clone();
        post.push(activated);
    }
    let logits = LogitVector::new(current)?;
    Ok((
        logits,
        ForwardTrace {
            input: x.clone(),
            pre,
            post,
            model_version: model.version,
        },
    ))
}

fn check_trace(model: &Model, trace: &ForwardTrace, grad: &LogitVector) -> Result<()> {
    if trace.model_version != model.version {
        return Err(Error::StaleTrace {
            model: model.version,
            trace: trace.model_version,
        });
    }
    if grad.len() != model.num_classes() {
        return Err(Error::ShapeMismatch {
            context: "logit gradient",
            expected: vec![model.num_classes()],
            actual: vec![grad.len()],
        });
    }
    Ok(())
}

/// Backpropagates a logit-space gradient to the input, returning dL/dX with
/// the shape of the traced input.
pub fn backprop_input(model: &Model, trace: &ForwardTrace, grad: &LogitVector) -> Result<Tensor> {
    check_trace(model, trace, grad)?;
    let mut delta: Vec<f64> = grad.values().to_vec();
    for (layer, pre) in model.layers.iter().zip(&trace.pre).rev() {
        // Through the activation, then through the affine map.
        for (d, &p) in delta.iter_mut().zip(pre) {
            *d *= layer.activation().derivative(p);
        }
        let (out_dim, in_dim) = (layer.out_dim(), layer.in_dim());
        let w = layer.weights().data();
        let mut prev = vec![0.0; in_dim];
        for o in 0..out_dim {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            let d = delta[o];
            if d != 0.0 {
                for (p, wi) in prev.iter_mut().zip(row) {
                    *p += wi * d;
                }
            }
        }
        delta = prev;
    }
    Tensor::new(trace.input.shape().to_vec(), delta)
}

/// Per-layer parameter gradients (row-major weight gradients plus bias
/// gradients), in layer order.
pub(crate) struct ParamGradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl ParamGradients {
    pub(crate) fn zeros(model: &Model) -> Self {
        Self {
            weights: model
                .layers
                .iter()
                .map(|l| vec![0.0; l.out_dim() * l.in_dim()])
                .collect(),
            bias: model.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect(),
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for layer in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            for v in layer {
                *v *= factor;
            }
        }
    }
}

/// Accumulates dL/dW and dL/db for one sample into `acc`.
pub(crate) fn accumulate_param_gradients(
    model: &Model,
    trace: &ForwardTrace,
    grad: &LogitVector,
    acc: &mut ParamGradients,
) -> Result<()> {
    check_trace(model, trace, grad)?;
    let mut delta: Vec<f64> = grad.values().to_vec();
    for (idx, (layer, pre)) in model.layers.iter().zip(&trace.pre).enumerate().rev() {
        for (d, &p) in delta.iter_mut().zip(pre) {
            *d *= layer.activation().derivative(p);
        }
        let layer_input: &[f64] = if idx == 0 {
            trace.input.data()
        } else {
            &trace.post[idx - 1]
        };
        let (out_dim, in_dim) = (layer.out_dim(), layer.in_dim());
        let dw = &mut acc.weights[idx];
        for o in 0..out_dim {
            let d = delta[o];
            acc.bias[idx][o] += d;
            if d != 0.0 {
                let row = &mut dw[o * in_dim..(o + 1) * in_dim];
                for (g, xi) in row.iter_mut().zip(layer_input) {
                    *g += d * xi;
                }
            }
        }
        if idx > 0 {
            let w = layer.weights().data();
            let mut prev = vec![0.0; in_dim];
            for o in 0..out_dim {
                let d = delta[o];
                if d != 0.0 {
                    let row = &w[o * in_dim..(o + 1) * in_dim];
                    for (p, wi) in prev.iter_mut().zip(row) {
                        *p += wi * d;
                    }
                }
            }
            delta = prev;
        }
    }
    Ok(())
}
