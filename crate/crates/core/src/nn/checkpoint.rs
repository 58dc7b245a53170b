//! Model checkpoints: a single JSON document with weights encoded as
//! base64 little-endian `f64`, so a save/load round trip is bit-exact.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::model::{Activation, DenseLayer, Model};
use crate::tensor::Tensor;

const SCHEMA: &str = "advrank-model-v1";

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    schema: String,
    dims: Vec<usize>,
    activations: Vec<String>,
    seed: Option<u64>,
    layers: Vec<LayerJson>,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    weights: String,
    bias: String,
}

fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_f64s(encoded: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = BASE64
        .decode(encoded)
        .map_err(|e| Error::Checkpoint(format!("bad base64: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(Error::Checkpoint(format!(
            "expected {} bytes of f64 data, got {}",
            expected * 8,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn model_to_json(model: &Model) -> Result<String> {
    let doc = CheckpointJson {
        schema: SCHEMA.to_string(),
        dims: model.dims(),
        activations: model
            .layers()
            .iter()
            .map(|l| l.activation().name().to_string())
            .collect(),
        seed: model.init_seed(),
        layers: model
            .layers()
            .iter()
            .map(|l| LayerJson {
                weights: encode_f64s(l.weights().data()),
                bias: encode_f64s(l.bias()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn model_from_json(json: &str) -> Result<Model> {
    let doc: CheckpointJson = serde_json::from_str(json)?;
    if doc.schema != SCHEMA {
        return Err(Error::Checkpoint(format!(
            "unsupported schema '{}', expected '{SCHEMA}'",
            doc.schema
        )));
    }
    if doc.dims.len() < 2 || doc.layers.len() != doc.dims.len() - 1 {
        return Err(Error::Checkpoint(
            "dims and layer count are inconsistent".into(),
        ));
    }
    if doc.activations.len() != doc.layers.len() {
        return Err(Error::Checkpoint(
            "one activation name per layer is required".into(),
        ));
    }
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (i, layer) in doc.layers.iter().enumerate() {
        let (in_dim, out_dim) = (doc.dims[i], doc.dims[i + 1]);
        let activation: Activation = doc.activations[i].parse()?;
        let weights = decode_f64s(&layer.weights, out_dim * in_dim)?;
        let bias = decode_f64s(&layer.bias, out_dim)?;
        layers.push(DenseLayer::new(
            Tensor::new(vec![out_dim, in_dim], weights)?,
            bias,
            activation,
        )?);
    }
    let model = Model::new(layers)?;
    Ok(match doc.seed {
        Some(seed) => model.with_init_seed(seed),
        None => model,
    })
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    model_from_json(&fs::read_to_string(path)?)
}
