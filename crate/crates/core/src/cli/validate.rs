use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::liouvillian::build_liouvillian;
use crate::model::{DensityMatrix, SystemParams};
use crate::steady_state::{residual, solve_analytic, solve_nullspace, solve_numeric};
use crate::sync::{
    closed_form_smax_n2, closed_form_smax_refrigerator, diagonality_sync_check_d3,
    marginalize_husimi_numeric, maximize_sync, phase_distribution, D3Check, SyncOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_params(rng: &mut ChaCha8Rng, n_deg: usize) -> SystemParams {
    let lambda = uniform(rng, 0.01, 0.5);
    SystemParams::resonant(
        1.0,
        uniform(rng, 2.0, 5.0),
        vec![lambda; n_deg],
        uniform(rng, 0.01, 0.5),
        uniform(rng, 0.01, 0.5),
        uniform(rng, 0.05, 5.0),
        uniform(rng, 0.05, 5.0),
    )
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("Gram matrix is a state")
}

/// Tracks the worst deviation of a check and whether any step errored.
struct Worst {
    value: f64,
    error: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, error: None }
    }

    fn record(&mut self, r: Result<f64>) {
        match r {
            Ok(v) => self.value = self.value.max(v),
            Err(e) => {
                self.error.get_or_insert(e.to_string());
            }
        }
    }

    fn outcome(self, name: &str, tol: f64) -> CheckOutcome {
        match self.error {
            Some(e) => CheckOutcome {
                name: name.into(),
                passed: false,
                detail: e,
            },
            None => CheckOutcome {
                name: name.into(),
                passed: self.value <= tol,
                detail: format!("max deviation {:.3e} (tolerance {tol:.0e})", self.value),
            },
        }
    }
}

fn steady_states(rng: &mut ChaCha8Rng, samples: usize) -> CheckOutcome {
    let mut worst = Worst::new();
    for n in 1..=4 {
        for _ in 0..samples {
            let p = random_params(rng, n);
            worst.record((|| {
                let s = build_liouvillian(&p)?;
                let num = solve_numeric(&s)?;
                let ana = solve_analytic(&p)?;
                let diff = (num.matrix() - ana.matrix()).camax();
                Ok(diff.max(residual(&s, &ana)?).max(residual(&s, &num)?))
            })());
        }
    }
    worst.outcome("analytic vs numeric steady state", 1e-10)
}

fn nullspace(rng: &mut ChaCha8Rng, samples: usize) -> CheckOutcome {
    let mut worst = Worst::new();
    for n in 2..=3 {
        for _ in 0..samples {
            let mut p = random_params(rng, n);
            p.drive_amps = (0..n).map(|_| uniform(rng, 0.01, 0.5)).collect();
            worst.record((|| {
                let s = build_liouvillian(&p)?;
                Ok((solve_numeric(&s)?.matrix() - solve_nullspace(&s)?.matrix()).camax())
            })());
        }
    }
    worst.outcome("trace-constrained solve vs SVD null vector", 1e-9)
}

fn closed_form_two_levels(seed: u64) -> CheckOutcome {
    let mut worst = Worst::new();
    let opts = SyncOptions { seed, ..SyncOptions::default() };
    let engine = SystemParams::reference(2).with_bath_ratio(10.0);
    let cases = (1..=16)
        .map(|i| engine.clone().with_dissipation_ratio(0.25 * i as f64))
        .chain([0.1, 0.2, 0.4, 0.6, 0.8].map(|r| SystemParams::reference(2).with_bath_ratio(r)));
    for p in cases {
        worst.record((|| {
            let closed = closed_form_smax_n2(&p)?;
            let numeric = maximize_sync(&solve_analytic(&p)?, &opts)?;
            Ok((closed.s_max - numeric.s_max).abs())
        })());
    }
    worst.outcome("two-level closed form vs optimizer", 1e-8)
}

fn closed_form_refrigerator(seed: u64) -> CheckOutcome {
    let mut worst = Worst::new();
    let opts = SyncOptions { seed, ..SyncOptions::default() };
    for n in 1..=6 {
        let p = SystemParams::reference(n);
        worst.record((|| {
            let closed = closed_form_smax_refrigerator(&p)?;
            let numeric = maximize_sync(&solve_analytic(&p)?, &opts)?;
            Ok((closed - numeric.s_max).abs())
        })());
    }
    worst.outcome("refrigerator closed form vs optimizer", 1e-8)
}

fn quadrature(rng: &mut ChaCha8Rng, samples: usize, quad_points: usize) -> CheckOutcome {
    let mut worst = Worst::new();
    for d in 2..=3 {
        for _ in 0..samples.min(5) {
            let rho = random_state(rng, d);
            for _ in 0..4 {
                let ph = crate::sync::PhaseVector::new(
                    (0..d - 1).map(|_| rng.random::<f64>() * TAU).collect(),
                );
                worst.record((|| {
                    let q = marginalize_husimi_numeric(&rho, &ph, quad_points)?;
                    Ok((q - phase_distribution(&rho, &ph)?).abs())
                })());
            }
        }
    }
    worst.outcome("Husimi quadrature vs closed-form distribution", 1e-6)
}

fn diagonality(rng: &mut ChaCha8Rng, samples: usize) -> CheckOutcome {
    let count = samples * 10;
    let mut failures = 0;
    for i in 0..count {
        let rho = if i % 2 == 0 {
            random_state(rng, 3)
        } else {
            let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 1e-3).collect();
            let t: f64 = w.iter().sum();
            let m = DMatrix::from_fn(3, 3, |r, c| {
                Complex64::new(if r == c { w[r] / t } else { 0.0 }, 0.0)
            });
            DensityMatrix::new(m).expect("diagonal state")
        };
        let ok = match diagonality_sync_check_d3(&rho) {
            Ok(D3Check::Witness { s_value, .. }) => i % 2 == 0 && s_value > 0.0,
            Ok(D3Check::Consistent { s_max_bound }) => i % 2 == 1 && s_max_bound < 1e-12,
            Err(_) => false,
        };
        if !ok {
            failures += 1;
        }
    }
    CheckOutcome {
        name: "three-level diagonality witness".into(),
        passed: failures == 0,
        detail: format!("{failures} of {count} states misclassified"),
    }
}

/// Runs every cross-check with a fixed seed and returns one outcome per check.
pub fn run_validation(seed: u64, samples: usize, quad_points: usize) -> Vec<CheckOutcome> {
    let samples = samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        steady_states(&mut rng, samples),
        nullspace(&mut rng, samples),
        closed_form_two_levels(seed),
        closed_form_refrigerator(seed),
        quadrature(&mut rng, samples, quad_points),
        diagonality(&mut rng, samples),
    ]
}
