//! Convergence-order bookkeeping for refinement studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residuals below this are treated as exact zeros.
pub const EXACT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ConvergenceOrder {
    Fitted(f64),
    /// Every residual is at round-off level; no slope exists.
    Exact,
}

impl ConvergenceOrder {
    pub fn at_least(self, p: f64) -> bool {
        match self {
            ConvergenceOrder::Fitted(q) => q >= p,
            ConvergenceOrder::Exact => true,
        }
    }

    pub fn fitted(self) -> Option<f64> {
        match self {
            ConvergenceOrder::Fitted(q) => Some(q),
            ConvergenceOrder::Exact => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted_order: ConvergenceOrder,
}

/// Least-squares slope of `log |residual|` against `log h`.
pub fn convergence_order(h_values: &[f64], residuals: &[f64]) -> Result<ConvergenceRecord> {
    if h_values.len() != residuals.len() {
        return Err(Error::ParameterRange(
            "h_values and residuals differ in length".into(),
        ));
    }
    if h_values.len() < 3 {
        return Err(Error::ParameterRange(format!(
            "at least 3 refinement levels required, got {}",
            h_values.len()
        )));
    }
    if h_values.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::ParameterRange("step sizes must be positive".into()));
    }
    let record = |fitted_order| ConvergenceRecord {
        h_values: h_values.to_vec(),
        residuals: residuals.to_vec(),
        fitted_order,
    };
    if residuals.iter().all(|r| r.abs() < EXACT_THRESHOLD) {
        return Ok(record(ConvergenceOrder::Exact));
    }
    let pts: Vec<(f64, f64)> = h_values
        .iter()
        .zip(residuals)
        .filter(|(_, r)| r.abs() > 0.0)
        .map(|(h, r)| (h.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(record(ConvergenceOrder::Exact));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(record(ConvergenceOrder::Fitted(sxy / sxx)))
}
