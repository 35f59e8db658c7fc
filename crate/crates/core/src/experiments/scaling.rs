use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit_power_law;
use crate::error::{Error, Result};
use crate::liouvillian::build_liouvillian;
use crate::model::{Regime, SystemParams};
use crate::steady_state::solve_numeric;
use crate::sync::{maximize_sync, scale_factor, SyncOptions};

/// Largest number of degenerate levels accepted by [`scaling_with_n`].
pub const MAX_SCALING_DEG: usize = 64;

/// How the extra drive amplitudes are drawn, recorded in every output.
pub const DRIVE_SAMPLING: &str = "lambda_j = lambda_2 * u, u ~ uniform(0, 1]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    /// Rates, occupations and `λ_2`; `n_deg` and the remaining amplitudes are
    /// set per realization.
    pub base_params: SystemParams,
    pub n_min: usize,
    pub n_max: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Use `λ_j = λ_2` for every level instead of random amplitudes.
    pub homogeneous: bool,
    /// Inclusive `N` range for the power-law fit; the full range when `None`.
    pub fit_window: Option<(usize, usize)>,
    pub options: SyncOptions,
}

impl ScalingSpec {
    /// Reference working point with `n_h / n_c` = 10 (engine) or 0.4 (refrigerator).
    pub fn for_regime(regime: Regime, n_min: usize, n_max: usize, realizations: usize, seed: u64) -> Self {
        let ratio = match regime {
            Regime::Engine => 10.0,
            Regime::Refrigerator => 0.4,
            Regime::Neutral => 1.0,
        };
        Self {
            base_params: SystemParams::reference(2).with_bath_ratio(ratio),
            n_min,
            n_max,
            realizations,
            seed,
            homogeneous: false,
            fit_window: None,
            options: SyncOptions::default(),
        }
    }
}

/// Maximizing phases `φ_j - φ_1` of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub n_deg: usize,
    pub realization: usize,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub n_values: Vec<usize>,
    pub smax_scaled_mean: Vec<f64>,
    pub smax_scaled_std: Vec<f64>,
    /// Mean of `(1/4) Σ_j |ρ_1j|`.
    pub entrainment_mean: Vec<f64>,
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fit_window: (usize, usize),
    pub realizations: usize,
    pub failures: Vec<usize>,
    pub seed: u64,
    pub sampling: String,
    pub phase_samples: Vec<PhaseSample>,
}

struct Sample {
    smax_scaled: f64,
    entrainment: f64,
    phases: Vec<f64>,
}

fn stream_id(n_deg: usize, realization: usize) -> u64 {
    ((n_deg as u64) << 32) | realization as u64
}

fn realization(spec: &ScalingSpec, n_deg: usize, index: usize) -> Result<Sample> {
    let lead = spec.base_params.drive_amps[0];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream_id(n_deg, index));
    let amps: Vec<f64> = (0..n_deg)
        .map(|j| {
            if j == 0 || spec.homogeneous {
                lead
            } else {
                // random::<f64>() is in [0, 1), so 1 - u lies in (0, 1].
                lead * (1.0 - rng.random::<f64>())
            }
        })
        .collect();
    let mut p = spec.base_params.clone();
    p.n_deg = n_deg;
    p.drive_amps = amps;

    let rho = solve_numeric(&build_liouvillian(&p)?)?;
    let opts = SyncOptions {
        seed: spec.options.seed ^ stream_id(n_deg, index),
        ..spec.options.clone()
    };
    let r = maximize_sync(&rho, &opts)?;
    let d = p.dim();
    let phases = r
        .optimal_phase_sets
        .first()
        .map(|set| (2..d).map(|j| set.relative(j, 1)).collect())
        .unwrap_or_default();
    Ok(Sample {
        smax_scaled: r.s_max_scaled,
        entrainment: scale_factor(d) * r.entrainment_contribution,
        phases,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Ensemble statistics of the scaled maximum versus the number of degenerate
/// levels, with a power-law fit of the mean.
///
/// Realization `i` at size `N` draws from its own ChaCha8 stream, so the
/// output is identical for any thread count.
pub fn scaling_with_n(spec: &ScalingSpec) -> Result<ScalingResult> {
    spec.base_params.validate()?;
    if spec.realizations == 0 {
        return Err(Error::Domain("realizations must be at least 1".into()));
    }
    if spec.n_min == 0 || spec.n_min > spec.n_max || spec.n_max > MAX_SCALING_DEG {
        return Err(Error::Domain(format!(
            "need 1 <= n_min <= n_max <= {MAX_SCALING_DEG}, got {}..={}",
            spec.n_min, spec.n_max
        )));
    }
    let window = spec.fit_window.unwrap_or((spec.n_min, spec.n_max));
    if window.0 < spec.n_min || window.1 > spec.n_max || window.0 > window.1 {
        return Err(Error::Domain(format!(
            "fit window {window:?} is outside {}..={}",
            spec.n_min, spec.n_max
        )));
    }

    let n_values: Vec<usize> = (spec.n_min..=spec.n_max).collect();
    let jobs: Vec<(usize, usize)> = n_values
        .iter()
        .flat_map(|&n| (0..spec.realizations).map(move |i| (n, i)))
        .collect();
    let outcomes: Vec<Result<Sample>> = jobs
        .par_iter()
        .map(|&(n, i)| realization(spec, n, i))
        .collect();

    let mut result = ScalingResult {
        n_values: n_values.clone(),
        smax_scaled_mean: Vec::new(),
        smax_scaled_std: Vec::new(),
        entrainment_mean: Vec::new(),
        alpha: f64::NAN,
        intercept: f64::NAN,
        r_squared: f64::NAN,
        fit_window: window,
        realizations: spec.realizations,
        failures: Vec::new(),
        seed: spec.seed,
        sampling: DRIVE_SAMPLING.to_string(),
        phase_samples: Vec::new(),
    };
    let mut first_error = None;
    for (block, &n) in outcomes.chunks(spec.realizations).zip(&n_values) {
        let mut smax = Vec::new();
        let mut ent = Vec::new();
        let mut failed = 0;
        for (i, outcome) in block.iter().enumerate() {
            match outcome {
                Ok(s) => {
                    smax.push(s.smax_scaled);
                    ent.push(s.entrainment);
                    result.phase_samples.push(PhaseSample {
                        n_deg: n,
                        realization: i,
                        phases: s.phases.clone(),
                    });
                }
                Err(e) => {
                    failed += 1;
                    first_error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        if smax.is_empty() {
            return Err(Error::Numeric(format!(
                "every realization failed at N = {n}: {}",
                first_error.unwrap_or_default()
            )));
        }
        let (m, s) = mean_std(&smax);
        result.smax_scaled_mean.push(m);
        result.smax_scaled_std.push(s);
        result.entrainment_mean.push(mean_std(&ent).0);
        result.failures.push(failed);
    }
    let failed: usize = result.failures.iter().sum();
    if failed * 100 > jobs.len() {
        return Err(Error::Numeric(format!(
            "{failed} of {} realizations failed (first: {})",
            jobs.len(),
            first_error.unwrap_or_default()
        )));
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = n_values
        .iter()
        .zip(&result.smax_scaled_mean)
        .filter(|(n, _)| (window.0..=window.1).contains(*n))
        .map(|(n, y)| (*n as f64, *y))
        .unzip();
    let (alpha, intercept, r2) = fit_power_law(&xs, &ys)?;
    result.alpha = alpha;
    result.intercept = intercept;
    result.r_squared = r2;
    Ok(result)
}

/// Optimal phases of every realization at `n_select` degenerate levels.
pub fn optimal_phase_cloud(result: &ScalingResult, n_select: usize) -> Result<Vec<PhaseSample>> {
    if !result.n_values.contains(&n_select) {
        return Err(Error::InvalidIndex(format!("N = {n_select} was not computed")));
    }
    Ok(result
        .phase_samples
        .iter()
        .filter(|s| s.n_deg == n_select)
        .cloned()
        .collect())
}

/// Writes `fig3_scaling.csv`-style output.
pub fn write_scaling_csv<W: Write>(r: &ScalingResult, provenance: &str, mut w: W) -> Result<()> {
    writeln!(w, "# params: {provenance}")?;
    writeln!(
        w,
        "# fit: alpha={:.17e} intercept={:.17e} r_squared={:.17e} window={}..={} sampling={}",
        r.alpha, r.intercept, r.r_squared, r.fit_window.0, r.fit_window.1, r.sampling
    )?;
    writeln!(w, "n_deg,smax_scaled_mean,smax_scaled_std,entrainment_mean,failures")?;
    for (i, n) in r.n_values.iter().enumerate() {
        writeln!(
            w,
            "{n},{:.17e},{:.17e},{:.17e},{}",
            r.smax_scaled_mean[i], r.smax_scaled_std[i], r.entrainment_mean[i], r.failures[i]
        )?;
    }
    Ok(())
}

/// Writes `fig3_phases.csv`-style output, one row per level and realization.
pub fn write_phases_csv<W: Write>(samples: &[PhaseSample], provenance: &str, mut w: W) -> Result<()> {
    writeln!(w, "# params: {provenance}")?;
    writeln!(w, "n_deg,realization,level,phase,cos,sin")?;
    for s in samples {
        for (j, phi) in s.phases.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{phi:.17e},{:.17e},{:.17e}",
                s.n_deg,
                s.realization,
                j + 2,
                phi.cos(),
                phi.sin()
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = ScalingSpec::for_regime(Regime::Refrigerator, 2, 4, 3, 11);
        let a = scaling_with_n(&spec).unwrap();
        let b = scaling_with_n(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_values, vec![2, 3, 4]);
        assert_eq!(a.smax_scaled_mean.len(), 3);
        assert!(a.smax_scaled_std.iter().all(|s| *s >= 0.0));
        assert_eq!(a.phase_samples.len(), 9);
        assert_eq!(optimal_phase_cloud(&a, 3).unwrap().len(), 3);
        assert!(optimal_phase_cloud(&a, 7).is_err());
    }

    #[test]
    fn homogeneous_ensemble_has_no_spread() {
        let mut spec = ScalingSpec::for_regime(Regime::Engine, 2, 4, 2, 1);
        spec.homogeneous = true;
        let r = scaling_with_n(&spec).unwrap();
        assert!(r.smax_scaled_std.iter().all(|s| *s < 1e-12));
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut spec = ScalingSpec::for_regime(Regime::Engine, 2, 4, 0, 1);
        assert!(scaling_with_n(&spec).is_err());
        spec.realizations = 1;
        spec.n_max = 65;
        assert!(scaling_with_n(&spec).is_err());
        spec.n_max = 4;
        spec.fit_window = Some((1, 4));
        assert!(scaling_with_n(&spec).is_err());
    }
}
