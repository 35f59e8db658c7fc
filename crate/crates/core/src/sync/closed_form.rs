use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::{entrainment_contribution, pair_prefactor, scale_factor, Branch, PhaseVector, SyncResult};
use crate::error::{Error, Result};
use crate::model::{dissipation_to_driving_ratio, regime_classify, Regime, SystemParams};
use crate::steady_state::{analytic_coefficients, solve_analytic};

/// Half-width of the band around `k = 2` where both engine branches are evaluated.
const BRANCH_DEAD_BAND: f64 = 1e-12;

/// Piecewise maximum for two degenerate levels.
///
/// With `a = |ρ_12| = |ρ_13|` and `b = |ρ_23|` the distribution reduces to a
/// two-variable trigonometric function whose maximum is
/// `2a + b` (refrigerator), `2a - b` (engine, `k > 2`) or `(1 + k²/2) b`
/// (engine, `k < 2`), all times `1/(16π²)`.
pub fn closed_form_smax_n2(p: &SystemParams) -> Result<SyncResult> {
    if p.n_deg != 2 {
        return Err(Error::NotApplicable(format!(
            "two-level closed form needs n_deg = 2, got {}",
            p.n_deg
        )));
    }
    let rho = solve_analytic(p)?;
    let lambda = p.drive_amps[0];
    let regime = regime_classify(p);
    if regime == Regime::Neutral || lambda == 0.0 {
        return Ok(SyncResult {
            s_max: 0.0,
            s_max_scaled: 0.0,
            optimal_phase_sets: Vec::new(),
            branch: Branch::Diagonal,
            entrainment_contribution: 0.0,
        });
    }
    let a = rho.get(1, 2).norm();
    let b = rho.get(2, 3).norm();
    let pref = pair_prefactor(4);
    // A negative drive flips the sign of the drive coherences, i.e. shifts both
    // manifold phases by π.
    let shift = if lambda < 0.0 { PI } else { 0.0 };
    let set = |x: f64, y: f64| PhaseVector::new(vec![0.0, x + shift, y + shift]);

    let (value, sets, branch) = match regime {
        Regime::Refrigerator => (
            2.0 * a + b,
            vec![set(1.5 * PI, 1.5 * PI)],
            Branch::RefrigeratorCooperative,
        ),
        _ => {
            let k = dissipation_to_driving_ratio(p)?;
            let in_phase = 2.0 * a - b;
            let split = (1.0 + k * k / 2.0) * b;
            if k > 2.0 + BRANCH_DEAD_BAND {
                (in_phase, vec![set(FRAC_PI_2, FRAC_PI_2)], Branch::EngineEntrainmentDominant)
            } else if k < 2.0 - BRANCH_DEAD_BAND {
                let chi = (k / 2.0).asin();
                (
                    split,
                    vec![set(chi, PI - chi), set(PI - chi, chi)],
                    Branch::EngineMutualDominant,
                )
            } else if in_phase >= split {
                (in_phase, vec![set(FRAC_PI_2, FRAC_PI_2)], Branch::EngineEntrainmentDominant)
            } else {
                (split, vec![set(FRAC_PI_2, FRAC_PI_2)], Branch::EngineMutualDominant)
            }
        }
    };
    let s_max = pref * value;
    Ok(SyncResult {
        s_max,
        s_max_scaled: scale_factor(4) * s_max,
        optimal_phase_sets: sets,
        branch,
        entrainment_contribution: entrainment_contribution(&rho),
    })
}

/// Maximum in the refrigerator regime for any number of degenerate levels,
/// where every coherence can be aligned at once.
pub fn closed_form_smax_refrigerator(p: &SystemParams) -> Result<f64> {
    Ok(closed_form_scaled_refrigerator(p)? / TAU.powf(p.n_deg as f64))
}

/// `(2π)^N` times [`closed_form_smax_refrigerator`], evaluated without the
/// power so it stays finite for large `N`.
pub fn closed_form_scaled_refrigerator(p: &SystemParams) -> Result<f64> {
    let coeffs = analytic_coefficients(p)?;
    if regime_classify(p) != Regime::Refrigerator {
        return Err(Error::NotApplicable(format!(
            "refrigerator closed form needs n_c > n_h (n_h = {}, n_c = {})",
            p.n_h, p.n_c
        )));
    }
    let lambda = p.drive_amps[0];
    let n = p.n_deg as f64;
    let drive = lambda * lambda * (n * n - n) + 2.0 * lambda.abs() * p.rate_hot_down() * n;
    Ok(drive * p.gamma_c * (p.n_c - p.n_h) / (8.0 * coeffs.value))
}

/// Large-`N` limit of the scaled refrigerator maximum.
pub fn asymptotic_smax(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if p.n_h == 0.0 {
        return Err(Error::Domain("asymptote diverges for n_h = 0".into()));
    }
    if regime_classify(p) == Regime::Engine {
        return Err(Error::NotApplicable(
            "asymptote is defined for the refrigerator regime only".into(),
        ));
    }
    let decay = p.rate_cold_down() + p.rate_hot_down();
    Ok(p.gamma_c * (p.n_c - p.n_h) / (8.0 * p.n_h * decay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sync::{l1_bound, maximize_sync, SyncOptions};

    #[test]
    fn asymptote_spot_value() {
        let v = asymptotic_smax(&SystemParams::reference(2)).unwrap();
        assert!((v - 0.05 / (2.0 * 0.3625)).abs() < 1e-15);
        assert!((v - 0.068966).abs() < 1e-6);
        let neutral = SystemParams::reference(2).with_bath_ratio(1.0);
        assert_eq!(asymptotic_smax(&neutral).unwrap(), 0.0);
        let mut cold = SystemParams::reference(2);
        cold.n_h = 0.0;
        assert!(matches!(asymptotic_smax(&cold), Err(Error::Domain(_))));
        let engine = SystemParams::reference(2).with_bath_ratio(10.0);
        assert!(matches!(asymptotic_smax(&engine), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn branches_meet_at_k_two() {
        let base = SystemParams::reference(2).with_bath_ratio(10.0);
        let below = closed_form_smax_n2(&base.clone().with_dissipation_ratio(2.0 - 1e-9)).unwrap();
        let above = closed_form_smax_n2(&base.clone().with_dissipation_ratio(2.0 + 1e-9)).unwrap();
        let at = closed_form_smax_n2(&base.with_dissipation_ratio(2.0)).unwrap();
        assert_eq!(below.branch, Branch::EngineMutualDominant);
        assert_eq!(above.branch, Branch::EngineEntrainmentDominant);
        assert!((below.s_max - at.s_max).abs() < 1e-12);
        assert!((above.s_max - at.s_max).abs() < 1e-12);
        let chi_set = &below.optimal_phase_sets[0];
        assert!(chi_set.torus_distance(&at.optimal_phase_sets[0]) < 1e-4);
    }

    #[test]
    fn refrigerator_forms_agree_at_two_levels() {
        for ratio in [0.1, 0.4, 0.9] {
            let p = SystemParams::reference(2).with_bath_ratio(ratio);
            let a = closed_form_smax_n2(&p).unwrap();
            let b = closed_form_smax_refrigerator(&p).unwrap();
            assert!((a.s_max - b).abs() < 1e-14 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn refrigerator_saturates_l1_bound_and_matches_optimizer() {
        for n in [1, 2, 5] {
            let p = SystemParams::reference(n);
            let rho = solve_analytic(&p).unwrap();
            let closed = closed_form_smax_refrigerator(&p).unwrap();
            assert!((closed - l1_bound(&rho)).abs() < 1e-14 * closed);
            let numeric = maximize_sync(&rho, &SyncOptions::default()).unwrap();
            assert!((numeric.s_max - closed).abs() < 1e-8 * closed);
        }
    }

    #[test]
    fn engine_is_not_applicable_for_refrigerator_form() {
        let p = SystemParams::reference(3).with_bath_ratio(4.0);
        assert!(closed_form_smax_refrigerator(&p).is_err());
        assert!(closed_form_smax_n2(&SystemParams::reference(3)).is_err());
    }

    #[test]
    fn negative_drive_shifts_phases() {
        let p = SystemParams::reference(2).with_bath_ratio(10.0).with_dissipation_ratio(1.0);
        let mut q = p.clone();
        q.drive_amps = vec![-q.drive_amps[0]; 2];
        let a = closed_form_smax_n2(&p).unwrap();
        let b = closed_form_smax_n2(&q).unwrap();
        assert!((a.s_max - b.s_max).abs() < 1e-15);
        let rho = solve_analytic(&q).unwrap();
        let numeric = maximize_sync(&rho, &SyncOptions::default()).unwrap();
        for set in &b.optimal_phase_sets {
            assert!(numeric
                .optimal_phase_sets
                .iter()
                .any(|s| s.torus_distance(set) < 1e-6));
        }
    }
}
