//! Phase-space synchronization measure built on the SU(D) Husimi-Q function.
//!
//! Phases are attached to levels. Level 0 is the reference and always carries
//! phase zero, so a [`PhaseVector`] for a `D`-level state holds the `D - 1`
//! phases of levels `1..D`. The phase quasi-distribution is
//!
//! ```text
//! S(φ) = 1 / (2^D π^(D-2)) Σ_{n<m} |ρ_nm| cos(φ_m - φ_n + arg ρ_nm)
//! ```
//!
//! and the synchronization measure is its maximum over the torus.

mod closed_form;
mod diagonal;
mod distribution;
mod husimi;
mod optimize;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::model::DensityMatrix;

pub use closed_form::{
    asymptotic_smax, closed_form_scaled_refrigerator, closed_form_smax_n2,
    closed_form_smax_refrigerator,
};
pub use diagonal::{diagonality_sync_check_d3, D3Check, WitnessCase, D3_COHERENCE_TOL};
pub use distribution::{
    phase_distribution, phase_distribution_full_sum, phase_distribution_grid, PhaseAxis,
    PhaseGrid,
};
pub use husimi::{
    coherent_state, gauss_legendre, husimi_q, marginalize_husimi_numeric, MAX_QUADRATURE_DIM,
};
pub use optimize::{maximize_sync, SyncOptions};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Phases of levels `1..D`, each wrapped into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Self {
        Self(phases.into_iter().map(wrap_phase).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Phase of `level`, with level 0 pinned at zero.
    pub fn level(&self, level: usize) -> f64 {
        if level == 0 {
            0.0
        } else {
            self.0[level - 1]
        }
    }

    /// `φ_a - φ_b` wrapped into `[0, 2π)`.
    pub fn relative(&self, a: usize, b: usize) -> f64 {
        wrap_phase(self.level(a) - self.level(b))
    }

    /// Euclidean norm of the componentwise circular distances.
    pub fn torus_distance(&self, other: &PhaseVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| circular_distance(*a, *b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Polar angles `θ_k ∈ [0, π/2]` plus azimuthal phases of an SU(D) coherent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiAngles {
    pub thetas: Vec<f64>,
    pub phases: PhaseVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `n_h < n_c`: entrainment and mutual coupling add up.
    RefrigeratorCooperative,
    /// `n_h > n_c`, `k > 2`: in-phase optimum, manifold coherence subtracts.
    EngineEntrainmentDominant,
    /// `n_h > n_c`, `k < 2`: split optimum `(χ, π - χ)`.
    EngineMutualDominant,
    /// No coherence; the distribution vanishes on the whole torus.
    Diagonal,
    NumericOnly,
}

/// Maximum of the phase distribution together with where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    pub s_max: f64,
    /// `(2π)^N s_max` with `N = D - 2`.
    pub s_max_scaled: f64,
    /// Distinct maximizers, canonicalized so the lowest level of each coupled
    /// block sits at phase zero. Empty when `branch` is `Diagonal`.
    pub optimal_phase_sets: Vec<PhaseVector>,
    pub branch: Branch,
    /// Part of the measure carried by the drive coherences `ρ_1j`.
    pub entrainment_contribution: f64,
}

/// `1 / (2^D π^(D-2))`, the weight of each `|ρ_nm|` in the pair form.
pub fn pair_prefactor(dim: usize) -> f64 {
    1.0 / (2f64.powi(dim as i32) * PI.powi(dim as i32 - 2))
}

/// `(2π)^(D-2)`.
pub fn scale_factor(dim: usize) -> f64 {
    TAU.powi(dim as i32 - 2)
}

/// `Σ_{n<m} |ρ_nm|`.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    (0..d)
        .flat_map(|n| (n + 1..d).map(move |m| (n, m)))
        .map(|(n, m)| rho.get(n, m).norm())
        .sum()
}

/// `pair_prefactor(D) · Σ_{j≥2} |ρ_1j|`.
pub fn entrainment_contribution(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    if d < 3 {
        return 0.0;
    }
    pair_prefactor(d) * (2..d).map(|j| rho.get(1, j).norm()).sum::<f64>()
}

/// Upper bound `C_l1 / (2^D π^(D-2))` on the measure.
pub fn l1_bound(rho: &DensityMatrix) -> f64 {
    pair_prefactor(rho.dim()) * l1_coherence(rho)
}
