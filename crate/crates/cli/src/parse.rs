//! Flag-value parsers. Numeric attack flags accept both decimals and
//! `16/255`-style fractions.

use advrank_core::data::{ImbalanceSpec, TransformSpec};
use advrank_core::nn::InitScheme;

pub fn parse_ratio(s: &str) -> Result<f64, String> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in '{s}'"))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in '{s}'"))?;
        if den == 0.0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        Ok(num / den)
    } else {
        s.parse().map_err(|_| format!("'{s}' is not a number"))
    }
}

/// `gaussian:MEAN:STD` or `kaiming`; the scheme seed is assigned separately.
pub fn parse_init(s: &str, seed: u64) -> Result<InitScheme, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["kaiming"] | ["kaiming-uniform"] => Ok(InitScheme::kaiming_uniform(seed)),
        ["gaussian", mean, std] => {
            let mean: f64 = mean.parse().map_err(|_| format!("bad mean in '{s}'"))?;
            let std: f64 = std.parse().map_err(|_| format!("bad std in '{s}'"))?;
            Ok(InitScheme::gaussian(mean, std, seed))
        }
        _ => Err(format!(
            "unknown init '{s}' (expected 'kaiming' or 'gaussian:MEAN:STD')"
        )),
    }
}

/// `none`, `linear:MAX:MIN`, or `exp:FACTOR`.
pub fn parse_imbalance(s: &str, seed: u64) -> Result<Option<ImbalanceSpec>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["none"] => Ok(None),
        ["linear", max, min] => {
            let max: usize = max.parse().map_err(|_| format!("bad max in '{s}'"))?;
            let min: usize = min.parse().map_err(|_| format!("bad min in '{s}'"))?;
            Ok(Some(ImbalanceSpec::linear(max, min, seed)))
        }
        ["exp", factor] | ["exponential", factor] => {
            let factor: f64 = factor.parse().map_err(|_| format!("bad factor in '{s}'"))?;
            Ok(Some(ImbalanceSpec::exponential(factor, seed)))
        }
        _ => Err(format!(
            "unknown imbalance '{s}' (expected 'none', 'linear:MAX:MIN', or 'exp:FACTOR')"
        )),
    }
}

/// `none`, `brightness:F`, `contrast:F`, or `noise:STD`.
pub fn parse_transform(s: &str, seed: u64) -> Result<TransformSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["none"] => Ok(TransformSpec::none()),
        ["brightness", f] => {
            let f: f64 = f.parse().map_err(|_| format!("bad factor in '{s}'"))?;
            Ok(TransformSpec::brightness(f))
        }
        ["contrast", f] => {
            let f: f64 = f.parse().map_err(|_| format!("bad factor in '{s}'"))?;
            Ok(TransformSpec::contrast(f))
        }
        ["noise", std] | ["gaussian-noise", std] => {
            let std: f64 = std.parse().map_err(|_| format!("bad std in '{s}'"))?;
            Ok(TransformSpec::gaussian_noise(std, seed))
        }
        _ => Err(format!(
            "unknown transform '{s}' (expected 'none', 'brightness:F', 'contrast:F', or 'noise:STD')"
        )),
    }
}

/// Comma-separated layer sizes, e.g. `64,32,10`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad layer size '{part}' in '{s}'"))
        })
        .collect()
}
