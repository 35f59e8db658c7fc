//! Parameter sweeps and drive-ensemble scaling studies.
//!
//! Every table can be written as CSV with a leading `# params: {json}` line
//! so a file can be traced back to the run that produced it.

mod scaling;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

pub use scaling::{
    optimal_phase_cloud, scaling_with_n, write_phases_csv, write_scaling_csv, PhaseSample,
    ScalingResult, ScalingSpec, DRIVE_SAMPLING, MAX_SCALING_DEG,
};
pub use sweep::{
    sweep_bath_ratio, sweep_drive_ratio, write_bath_csv, write_drive_csv, BathRow, DriveRegimes,
    DriveRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `n_h / n_c` with `n_c` held fixed.
    BathRatio,
    /// `λ_2 / λ_3` with `λ_2` held fixed.
    DriveRatio,
    /// `k = γ_h (1 + n_h) / λ`.
    DissipationRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base_params: SystemParams,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SweepSpec {
    fn check(&self, axis: SweepAxis) -> Result<()> {
        if self.axis != axis {
            return Err(Error::Domain(format!(
                "sweep expects axis {axis:?}, got {:?}",
                self.axis
            )));
        }
        if self.values.is_empty() {
            return Err(Error::Domain("sweep values are empty".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sweep value {v} is not finite")));
        }
        self.base_params.validate()
    }
}

/// `n` values spaced evenly in log scale from `lo` to `hi`, both included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Least-squares line through `(ln n, ln y)`; returns `(slope, intercept, r²)`.
pub fn fit_power_law(n_values: &[f64], y_values: &[f64]) -> Result<(f64, f64, f64)> {
    if n_values.len() != y_values.len() {
        return Err(Error::DimensionMismatch {
            expected: n_values.len(),
            found: y_values.len(),
        });
    }
    if n_values.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", n_values.len())));
    }
    if let Some(y) = y_values.iter().chain(n_values).find(|y| !(**y > 0.0)) {
        return Err(Error::Domain(format!("power-law fit needs positive data, got {y}")));
    }
    let xs: Vec<f64> = n_values.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y_values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all n values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.17e}"))
}
