//! Parameter sweeps over a single prepared set of models: step size and
//! iteration count, and the softmax temperature of the attack loss.

use serde::{Deserialize, Serialize};

use crate::attacks::AttackConfig;
use crate::error::{Error, Result};
use crate::harness::transfer::{prepare, run_cell, ExperimentReport};
use crate::harness::ExperimentSpec;
use crate::losses::LossKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub steps: usize,
    pub report: ExperimentReport,
}

impl SweepCell {
    pub fn white_box_mean_icr(&self) -> f64 {
        self.report.rows[0].mean_icr
    }

    /// Mean ICR averaged over the target-model rows.
    pub fn target_mean_icr(&self) -> Option<f64> {
        let targets = &self.report.rows[1..];
        if targets.is_empty() {
            return None;
        }
        Some(targets.iter().map(|r| r.mean_icr).sum::<f64>() / targets.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    /// Cells for one step size, in the swept iteration order.
    pub fn cells_for_alpha(&self, alpha: f64) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.alpha == alpha).collect()
    }
}

/// Full factorial sweep over step sizes and iteration counts. Models are
/// trained once and shared by every cell.
pub fn run_alpha_t_sweep(
    spec: &ExperimentSpec,
    alphas: &[f64],
    step_counts: &[usize],
) -> Result<SweepGrid> {
    if alphas.is_empty() || step_counts.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    let ctx = prepare(spec)?;
    let mut cells = Vec::with_capacity(alphas.len() * step_counts.len());
    for &alpha in alphas {
        for &steps in step_counts {
            let attack = AttackConfig {
                alpha,
                steps,
                ..spec.attack.clone()
            };
            let outcome = run_cell(&ctx, &attack)?;
            cells.push(SweepCell {
                alpha,
                steps,
                report: outcome.report,
            });
        }
    }
    Ok(SweepGrid { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureRow {
    pub label: String,
    pub loss: LossKind,
    pub white_box_mean_icr: f64,
}

/// White-box mean ICR per temperature, bracketed by a `cw` row below and an
/// `rce` row above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSweep {
    pub rows: Vec<TemperatureRow>,
}

impl TemperatureSweep {
    pub fn row(&self, label: &str) -> Option<&TemperatureRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

pub fn run_temperature_sweep(
    spec: &ExperimentSpec,
    temperatures: &[f64],
) -> Result<TemperatureSweep> {
    if temperatures.is_empty() {
        return Err(Error::EmptyInput("temperature sweep"));
    }
    if let Some(&bad) = temperatures.iter().find(|&&t| t.is_nan() || t <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperatures must be positive, got {bad}"
        )));
    }
    let ctx = prepare(spec)?;
    let mut losses: Vec<LossKind> = vec![LossKind::Cw];
    losses.extend(temperatures.iter().map(|&t| LossKind::CeTemp(t)));
    losses.push(LossKind::Rce);
    let mut rows = Vec::with_capacity(losses.len());
    for loss in losses {
        let attack = AttackConfig {
            loss,
            ..spec.attack.clone()
        };
        let outcome = run_cell(&ctx, &attack)?;
        rows.push(TemperatureRow {
            label: loss.to_string(),
            loss,
            white_box_mean_icr: outcome.report.rows[0].mean_icr,
        });
    }
    Ok(TemperatureSweep { rows })
}
