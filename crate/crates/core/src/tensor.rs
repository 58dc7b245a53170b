//! Row-major `f64` tensor.
//!
//! The engine only needs flat vectors and `h x w` image grids, so this stays
//! deliberately small: shape bookkeeping, element access, and a finiteness
//! guarantee at construction. Image-aware operations (input diversity,
//! gradient smoothing) dispatch on a 2-D shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, checking that `shape` and `data` agree and that all
    /// values are finite.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch {
                context: "tensor construction",
                expected: vec![expected],
                actual: vec![data.len()],
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor data"));
        }
        Ok(Self { shape, data })
    }

    /// 1-D tensor from a flat vector.
    pub fn vector(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::new(vec![n], data)
    }

    /// `h x w` image tensor.
    pub fn image(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![height, width], data)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// `Some((h, w))` when this tensor is a 2-D image grid.
    pub fn grid(&self) -> Option<(usize, usize)> {
        match self.shape.as_slice() {
            [h, w] => Some((*h, *w)),
            _ => None,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Reinterprets the flat data under a new shape of equal size.
    pub fn reshaped(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data.clone())
    }
}
