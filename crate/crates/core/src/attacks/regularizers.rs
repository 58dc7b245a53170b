//! Transferability regularizers that need grid-shaped data: probabilistic
//! pad-and-crop input diversity and Gaussian smoothing of input gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Gaussian smoothing kernel: `size x size`, normalized to sum 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub size: usize,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(size: usize, sigma: f64) -> Self {
        Self { size, sigma }
    }

    /// Row-major normalized kernel entries.
    pub fn matrix(&self) -> Result<Vec<f64>> {
        if self.size == 0 || self.size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd and positive, got {}",
                self.size
            )));
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kernel sigma must be positive, got {}",
                self.sigma
            )));
        }
        let radius = (self.size / 2) as isize;
        let mut entries = Vec::with_capacity(self.size * self.size);
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let d2 = (dy * dy + dx * dx) as f64;
                entries.push((-d2 / (2.0 * self.sigma * self.sigma)).exp());
            }
        }
        let total: f64 = entries.iter().sum();
        for e in &mut entries {
            *e /= total;
        }
        Ok(entries)
    }
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;

    /// Parses `SIZE:SIGMA`, e.g. `3:1`.
    fn from_str(s: &str) -> Result<Self> {
        let (size, sigma) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("kernel '{s}' is not SIZE:SIGMA")))?;
        let spec = KernelSpec {
            size: size
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad kernel size in '{s}'")))?,
            sigma: sigma
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad kernel sigma in '{s}'")))?,
        };
        spec.matrix()?;
        Ok(spec)
    }
}

/// With probability `p`: pad the image into a zero canvas two pixels larger
/// at a random offset, then crop back to the original size at another random
/// offset. Otherwise the identity. Deterministic under `seed`.
pub fn di_transform(x: &Tensor, p: f64, seed: u64) -> Result<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    di_transform_with(x, p, &mut rng)
}

pub(crate) fn di_transform_with(x: &Tensor, p: f64, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "diversity probability must be in [0, 1], got {p}"
        )));
    }
    let (h, w) = x
        .grid()
        .ok_or(Error::GridRequired("input diversity transform"))?;
    if rng.random_range(0.0..1.0) >= p {
        return Ok(x.clone());
    }
    let (canvas_h, canvas_w) = (h + 2, w + 2);
    let (oy, ox) = (rng.random_range(0..3usize), rng.random_range(0..3usize));
    let (cy, cx) = (rng.random_range(0..3usize), rng.random_range(0..3usize));
    let mut canvas = vec![0.0; canvas_h * canvas_w];
    for r in 0..h {
        for c in 0..w {
            canvas[(oy + r) * canvas_w + (ox + c)] = x.data()[r * w + c];
        }
    }
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = canvas[(cy + r) * canvas_w + (cx + c)];
        }
    }
    Tensor::image(h, w, out)
}

/// Convolves a grid-shaped gradient with the normalized Gaussian kernel,
/// zero-padded at the borders.
pub fn ti_smooth(grad: &Tensor, kernel: &KernelSpec) -> Result<Tensor> {
    let (h, w) = grad
        .grid()
        .ok_or(Error::GridRequired("gradient smoothing"))?;
    let entries = kernel.matrix()?;
    let radius = (kernel.size / 2) as isize;
    let data = grad.data();
    let mut out = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let (sy, sx) = (y + dy, x + dx);
                    if sy < 0 || sy >= h as isize || sx < 0 || sx >= w as isize {
                        continue;
                    }
                    let k = entries
                        [((dy + radius) * kernel.size as isize + (dx + radius)) as usize];
                    acc += k * data[(sy * w as isize + sx) as usize];
                }
            }
            out[(y * w as isize + x) as usize] = acc;
        }
    }
    Tensor::image(h, w, out)
}
