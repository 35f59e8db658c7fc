use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_opt, SweepAxis, SweepSpec};
use crate::error::{Error, Result};
use crate::liouvillian::build_liouvillian;
use crate::model::{regime_classify, Regime, SystemParams};
use crate::steady_state::solve_numeric;
use crate::sync::{closed_form_smax_n2, maximize_sync, Branch, SyncOptions, SyncResult};

/// One point of the bath-ratio sweep. Solver failures leave the numeric
/// columns empty and record the message in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathRow {
    pub bath_ratio: f64,
    pub regime: Regime,
    pub s_max: Option<f64>,
    pub s_max_closed_form: Option<f64>,
    pub entrainment: Option<f64>,
    pub branch: Option<Branch>,
    pub error: Option<String>,
}

fn numeric_sync(p: &SystemParams, opts: &SyncOptions) -> Result<SyncResult> {
    let rho = solve_numeric(&build_liouvillian(p)?)?;
    maximize_sync(&rho, opts)
}

/// Numeric and closed-form maxima as `n_h / n_c` varies.
pub fn sweep_bath_ratio(spec: &SweepSpec, opts: &SyncOptions) -> Result<Vec<BathRow>> {
    spec.check(SweepAxis::BathRatio)?;
    let opts = SyncOptions { seed: spec.seed, ..opts.clone() };
    Ok(spec
        .values
        .par_iter()
        .map(|&ratio| {
            let p = spec.base_params.clone().with_bath_ratio(ratio);
            let mut row = BathRow {
                bath_ratio: ratio,
                regime: regime_classify(&p),
                s_max: None,
                s_max_closed_form: None,
                entrainment: None,
                branch: None,
                error: None,
            };
            match numeric_sync(&p, &opts) {
                Ok(r) => {
                    row.s_max = Some(r.s_max);
                    row.entrainment = Some(r.entrainment_contribution);
                    row.branch = Some(r.branch);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            if p.n_deg == 2 && p.is_resonant() && p.homogeneous_drive().is_some() {
                match closed_form_smax_n2(&p) {
                    Ok(c) => {
                        row.s_max_closed_form = Some(c.s_max);
                        row.branch = Some(c.branch);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            row
        })
        .collect())
}

/// Bath ratios used for the two regimes of the drive-ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveRegimes {
    pub engine_bath_ratio: f64,
    pub refrigerator_bath_ratio: f64,
}

impl Default for DriveRegimes {
    fn default() -> Self {
        Self {
            engine_bath_ratio: 10.0,
            refrigerator_bath_ratio: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveRow {
    /// `λ_2 / λ_3`.
    pub drive_ratio: f64,
    pub engine_s_max: Option<f64>,
    pub engine_entrainment: Option<f64>,
    pub refrigerator_s_max: Option<f64>,
    pub refrigerator_entrainment: Option<f64>,
    pub error: Option<String>,
}

/// Two degenerate levels with `λ_3 = λ_2 / ratio`, solved numerically in both regimes.
pub fn sweep_drive_ratio(
    spec: &SweepSpec,
    regimes: DriveRegimes,
    opts: &SyncOptions,
) -> Result<Vec<DriveRow>> {
    spec.check(SweepAxis::DriveRatio)?;
    if spec.base_params.n_deg != 2 {
        return Err(Error::NotApplicable(format!(
            "drive-ratio sweep needs n_deg = 2, got {}",
            spec.base_params.n_deg
        )));
    }
    if let Some(v) = spec.values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
        return Err(Error::Domain(format!("drive ratio {v} is outside (0, 1]")));
    }
    let opts = SyncOptions { seed: spec.seed, ..opts.clone() };
    let lead = spec.base_params.drive_amps[0];
    Ok(spec
        .values
        .par_iter()
        .map(|&ratio| {
            let mut p = spec.base_params.clone();
            p.drive_amps = vec![lead, lead / ratio];
            let engine = numeric_sync(&p.clone().with_bath_ratio(regimes.engine_bath_ratio), &opts);
            let fridge =
                numeric_sync(&p.with_bath_ratio(regimes.refrigerator_bath_ratio), &opts);
            let error = [&engine, &fridge]
                .iter()
                .filter_map(|r| r.as_ref().err().map(|e| e.to_string()))
                .reduce(|a, b| format!("{a}; {b}"));
            DriveRow {
                drive_ratio: ratio,
                engine_s_max: engine.as_ref().ok().map(|r| r.s_max),
                engine_entrainment: engine.as_ref().ok().map(|r| r.entrainment_contribution),
                refrigerator_s_max: fridge.as_ref().ok().map(|r| r.s_max),
                refrigerator_entrainment: fridge.as_ref().ok().map(|r| r.entrainment_contribution),
                error,
            }
        })
        .collect())
}

fn branch_label(b: Option<Branch>) -> String {
    b.map_or_else(String::new, |b| format!("{b:?}"))
}

/// Writes `fig2c.csv`-style output.
pub fn write_bath_csv<W: Write>(rows: &[BathRow], provenance: &str, mut w: W) -> Result<()> {
    writeln!(w, "# params: {provenance}")?;
    writeln!(w, "bath_ratio,regime,s_max,s_max_closed_form,entrainment,branch,error")?;
    for r in rows {
        writeln!(
            w,
            "{:.17e},{:?},{},{},{},{},{}",
            r.bath_ratio,
            r.regime,
            fmt_opt(r.s_max),
            fmt_opt(r.s_max_closed_form),
            fmt_opt(r.entrainment),
            branch_label(r.branch),
            csv_text(r.error.as_deref()),
        )?;
    }
    Ok(())
}

/// Writes `fig2d.csv`-style output.
pub fn write_drive_csv<W: Write>(rows: &[DriveRow], provenance: &str, mut w: W) -> Result<()> {
    writeln!(w, "# params: {provenance}")?;
    writeln!(
        w,
        "drive_ratio,engine_s_max,engine_entrainment,refrigerator_s_max,refrigerator_entrainment,error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.17e},{},{},{},{},{}",
            r.drive_ratio,
            fmt_opt(r.engine_s_max),
            fmt_opt(r.engine_entrainment),
            fmt_opt(r.refrigerator_s_max),
            fmt_opt(r.refrigerator_entrainment),
            csv_text(r.error.as_deref()),
        )?;
    }
    Ok(())
}

fn csv_text(s: Option<&str>) -> String {
    match s {
        None => String::new(),
        Some(s) => format!("\"{}\"", s.replace('"', "\"\"")),
    }
}
