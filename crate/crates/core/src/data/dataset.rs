//! Synthetic dataset generation and JSON-lines import/export.
//!
//! Two generators cover the harness's needs: Gaussian blobs for plain
//! vector data and noisy binary patterns on a square grid for image-shaped
//! data (pad/crop diversity, gradient smoothing, and the brightness/contrast
//! transforms only make sense on grids).

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Labeled samples with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Tensor>,
    labels: Vec<usize>,
    num_classes: usize,
    grid: Option<(usize, usize)>,
}

impl Dataset {
    pub fn new(
        inputs: Vec<Tensor>,
        labels: Vec<usize>,
        num_classes: usize,
        grid: Option<(usize, usize)>,
    ) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                context: "dataset inputs vs labels",
                expected: vec![inputs.len()],
                actual: vec![labels.len()],
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        let expected_shape: Option<Vec<usize>> = match grid {
            Some((h, w)) => Some(vec![h, w]),
            None => inputs.first().map(|t| t.shape().to_vec()),
        };
        for (i, input) in inputs.iter().enumerate() {
            if let Some(ref shape) = expected_shape {
                if input.shape() != shape.as_slice() {
                    return Err(Error::ShapeMismatch {
                        context: "dataset input shape",
                        expected: shape.clone(),
                        actual: input.shape().to_vec(),
                    });
                }
            }
            if input.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidParameter(format!(
                    "sample {i} has values outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            inputs,
            labels,
            num_classes,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Tensor] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    pub fn input(&self, i: usize) -> &Tensor {
        &self.inputs[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map(|t| t.len()).unwrap_or(0)
    }

    /// Subset by sample index, preserving order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let inputs = indices.iter().map(|&i| self.inputs[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(inputs, labels, self.num_classes, self.grid)
    }

    /// Number of samples per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Writes one JSON record per sample: `{"input": [...], "label": n, "grid": [h, w] | null}`.
    pub fn to_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for (input, &label) in self.inputs.iter().zip(&self.labels) {
            let record = SampleJson {
                input: input.data().to_vec(),
                label,
                grid: self.grid.map(|(h, w)| [h, w]),
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads a JSON-lines dataset; the class count is inferred as
    /// `max(label) + 1`.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        let mut grid: Option<(usize, usize)> = None;
        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SampleJson = serde_json::from_str(&line).map_err(|e| {
                Error::InvalidParameter(format!("dataset line {}: {e}", line_no + 1))
            })?;
            let this_grid = record.grid.map(|[h, w]| (h, w));
            if inputs.is_empty() {
                grid = this_grid;
            } else if grid != this_grid {
                return Err(Error::InvalidParameter(format!(
                    "dataset line {}: inconsistent grid",
                    line_no + 1
                )));
            }
            let tensor = match this_grid {
                Some((h, w)) => Tensor::image(h, w, record.input)?,
                None => Tensor::vector(record.input)?,
            };
            inputs.push(tensor);
            labels.push(record.label);
        }
        if inputs.is_empty() {
            return Err(Error::EmptyInput("jsonl dataset"));
        }
        let num_classes = labels.iter().max().copied().unwrap_or(0) + 1;
        Self::new(inputs, labels, num_classes, grid)
    }
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    input: Vec<f64>,
    label: usize,
    grid: Option<[usize; 2]>,
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Greedy max-min selection of `k` well-separated centers from a seeded
/// candidate pool in `[0.3, 0.7]^dim`. The pool range keeps class
/// differences diffuse across coordinates: separable for a linear
/// classifier at small spreads, yet with decision boundaries close enough
/// (in the max-norm) for pixel-budgeted attacks to reach.
fn pick_centers(k: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let pool_size = (8 * k).max(64);
    let pool: Vec<Vec<f64>> = (0..pool_size)
        .map(|_| (0..dim).map(|_| rng.random_range(0.3..0.7)).collect())
        .collect();
    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let mut centers: Vec<Vec<f64>> = vec![pool[0].clone()];
    while centers.len() < k {
        let best = pool
            .iter()
            .max_by(|a, b| {
                let da = centers.iter().map(|c| dist2(a, c)).fold(f64::MAX, f64::min);
                let db = centers.iter().map(|c| dist2(b, c)).fold(f64::MAX, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        centers.push(best.clone());
    }
    centers
}

/// Gaussian class clusters clamped to `[0, 1]`, in class-major order.
/// Centers are spread out enough that a linear classifier separates them
/// at small spreads.
pub fn gen_blobs(
    num_classes: usize,
    dim: usize,
    n_per_class: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes < 2 || dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "gen_blobs needs at least 2 classes and 2 dims, got K={num_classes}, dim={dim}"
        )));
    }
    if spread.is_nan() || spread < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "spread must be non-negative, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = pick_centers(num_classes, dim, &mut rng);
    let noise = if spread > 0.0 {
        Some(Normal::new(0.0, spread).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut inputs = Vec::with_capacity(num_classes * n_per_class);
    let mut labels = Vec::with_capacity(num_classes * n_per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let values: Vec<f64> = center
                .iter()
                .map(|&m| match &noise {
                    Some(n) => clamp01(m + n.sample(&mut rng)),
                    None => m,
                })
                .collect();
            inputs.push(Tensor::vector(values)?);
            labels.push(c);
        }
    }
    Dataset::new(inputs, labels, num_classes, None)
}

/// Pixel levels of the two-valued base patterns. Low contrast keeps the
/// class signal diffuse over many pixels, so the boundaries between
/// classes sit within reach of small per-pixel perturbation budgets.
const PATTERN_LO: f64 = 0.46;
const PATTERN_HI: f64 = 0.54;

/// Binary (two-level) base patterns on a `side x side` grid plus uniform
/// pixel noise, clamped to `[0, 1]`, in class-major order.
pub fn gen_patterns(
    num_classes: usize,
    side: usize,
    n_per_class: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if side < 4 {
        return Err(Error::InvalidParameter(format!(
            "pattern side must be at least 4, got {side}"
        )));
    }
    if num_classes == 0 || num_classes > side * side {
        return Err(Error::InvalidParameter(format!(
            "need 1..={} distinct base patterns, got {num_classes}",
            side * side
        )));
    }
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise must be non-negative, got {noise}"
        )));
    }
    let pixels = side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patterns: Vec<Vec<f64>> = Vec::with_capacity(num_classes);
    while patterns.len() < num_classes {
        let candidate: Vec<f64> = (0..pixels)
            .map(|_| {
                if rng.random_range(0..2u8) == 1 {
                    PATTERN_HI
                } else {
                    PATTERN_LO
                }
            })
            .collect();
        if !patterns.contains(&candidate) {
            patterns.push(candidate);
        }
    }
    let mut inputs = Vec::with_capacity(num_classes * n_per_class);
    let mut labels = Vec::with_capacity(num_classes * n_per_class);
    for (c, pattern) in patterns.iter().enumerate() {
        for _ in 0..n_per_class {
            let values: Vec<f64> = pattern
                .iter()
                .map(|&p| {
                    if noise > 0.0 {
                        clamp01(p + rng.random_range(-noise..noise))
                    } else {
                        p
                    }
                })
                .collect();
            inputs.push(Tensor::image(side, side, values)?);
            labels.push(c);
        }
    }
    Dataset::new(inputs, labels, num_classes, Some((side, side)))
}
