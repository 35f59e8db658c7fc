use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::distribution::pair_sum;
use super::{l1_bound, PhaseVector};
use crate::error::{Error, Result};
use crate::model::DensityMatrix;

/// Coherences at or below this magnitude count as absent.
pub const D3_COHERENCE_TOL: f64 = 1e-10;

/// Cosine values this close to zero use the in-phase construction.
const COSINE_DEAD_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessCase {
    SingleCoherence,
    TwoCoherences,
    AllCoherences,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum D3Check {
    /// No coherence above tolerance; the maximum is bounded by `s_max_bound`.
    Consistent { s_max_bound: f64 },
    /// Phases at which the distribution is positive.
    Witness {
        phases: PhaseVector,
        s_value: f64,
        case: WitnessCase,
    },
}

/// For three levels the maximum vanishes only for a diagonal state. A
/// non-diagonal state gets explicit phases with `S > 0`; a diagonal one gets
/// the l1 bound as certificate.
pub fn diagonality_sync_check_d3(rho: &DensityMatrix) -> Result<D3Check> {
    if rho.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: rho.dim(),
        });
    }
    let (c01, c02, c12) = (rho.get(0, 1), rho.get(0, 2), rho.get(1, 2));
    let present = [c01, c02, c12].map(|z| z.norm() > D3_COHERENCE_TOL);
    let (p01, p02, p12) = (c01.arg(), c02.arg(), c12.arg());

    let (phi1, phi2, case) = match present {
        [false, false, false] => {
            return Ok(D3Check::Consistent {
                s_max_bound: l1_bound(rho),
            })
        }
        [true, false, false] => (-p01, 0.0, WitnessCase::SingleCoherence),
        [false, true, false] => (0.0, -p02, WitnessCase::SingleCoherence),
        [false, false, true] => (0.0, -p12, WitnessCase::SingleCoherence),
        [true, true, false] => (-p01, -p02, WitnessCase::TwoCoherences),
        [true, false, true] => (-p01, -p01 - p12, WitnessCase::TwoCoherences),
        [false, true, true] => (p12 - p02, -p02, WitnessCase::TwoCoherences),
        [true, true, true] => {
            let c = (p01 - p02 + p12).cos();
            let phases = if c.abs() < COSINE_DEAD_BAND {
                (-p01, -p02)
            } else if c > 0.0 {
                (FRAC_PI_2 - p01, FRAC_PI_2 - p02)
            } else {
                (-FRAC_PI_2 - p01, FRAC_PI_2 - p02)
            };
            (phases.0, phases.1, WitnessCase::AllCoherences)
        }
    };
    let phases = PhaseVector::new(vec![phi1, phi2]);
    Ok(D3Check::Witness {
        s_value: pair_sum(rho, &phases),
        phases,
        case,
    })
}
