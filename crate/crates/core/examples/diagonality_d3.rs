//! For three levels the maximum vanishes exactly when the state is diagonal.
//! Each non-diagonal state gets explicit phases where the distribution is positive.

use std::f64::consts::FRAC_PI_2;

use maser_sync::model::DensityMatrix;
use maser_sync::sync::{diagonality_sync_check_d3, D3Check};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn state(c01: Complex64, c02: Complex64, c12: Complex64) -> DensityMatrix {
    let mut m = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0 / 3.0, 0.0));
    for (i, j, z) in [(0, 1, c01), (0, 2, c02), (1, 2, c12)] {
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    DensityMatrix::new(m).expect("valid state")
}

fn main() -> maser_sync::Result<()> {
    let zero = Complex64::new(0.0, 0.0);
    let cases = [
        ("diagonal", state(zero, zero, zero)),
        ("one coherence", state(Complex64::from_polar(0.1, 0.8), zero, zero)),
        ("two coherences", state(Complex64::from_polar(0.1, 0.8), zero, Complex64::from_polar(0.05, -2.0))),
        (
            "three, vanishing cosine",
            state(
                Complex64::from_polar(0.05, 0.3),
                Complex64::from_polar(0.04, 0.1),
                Complex64::from_polar(0.03, FRAC_PI_2 - 0.2),
            ),
        ),
        (
            "three, generic",
            state(
                Complex64::from_polar(0.05, 1.0),
                Complex64::from_polar(0.04, 2.0),
                Complex64::from_polar(0.03, 3.0),
            ),
        ),
    ];
    for (label, rho) in &cases {
        match diagonality_sync_check_d3(rho)? {
            D3Check::Consistent { s_max_bound } => {
                println!("{label:>24}: diagonal, S_max <= {s_max_bound:e}")
            }
            D3Check::Witness { phases, s_value, case } => println!(
                "{label:>24}: {case:?}, S = {s_value:.4e} at phases {:?}",
                phases.as_slice()
            ),
        }
    }
    Ok(())
}
