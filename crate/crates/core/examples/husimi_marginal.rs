//! Integrates the SU(D) Husimi function over its polar angles by quadrature
//! and compares with the closed-form phase distribution.

use std::f64::consts::TAU;

use maser_sync::model::DensityMatrix;
use maser_sync::sync::{marginalize_husimi_numeric, phase_distribution, PhaseVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maser_sync::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 2..=4 {
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        let rho = DensityMatrix::new(m / tr)?;
        let phases = PhaseVector::new((0..d - 1).map(|_| rng.random::<f64>() * TAU).collect());
        for nodes in [4, 8, 16] {
            let q = marginalize_husimi_numeric(&rho, &phases, nodes)?;
            let s = phase_distribution(&rho, &phases)?;
            println!("D = {d}, {nodes:>2} nodes: quadrature {q:+.12e}, closed form {s:+.12e}");
        }
    }
    Ok(())
}
