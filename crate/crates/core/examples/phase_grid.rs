//! Phase distribution over (phi_21, phi_31) for an engine on either side of k = 2.
//!
//! In-phase locking shows up as a single peak; the mutual-coupling branch
//! produces two peaks with phi_21 - phi_31 pushed towards π.

use std::f64::consts::PI;

use maser_sync::model::SystemParams;
use maser_sync::steady_state::solve_analytic;
use maser_sync::sync::{phase_distribution_grid, PhaseAxis, PhaseVector};

fn main() -> maser_sync::Result<()> {
    let engine = SystemParams::reference(2).with_bath_ratio(100.0);
    for k in [3.0, 0.75, 0.05] {
        let p = engine.clone().with_dissipation_ratio(k);
        let rho = solve_analytic(&p)?;
        let grid = phase_distribution_grid(
            &rho,
            PhaseAxis::new(2, 1),
            PhaseAxis::new(3, 1),
            &PhaseVector::zeros(3),
            128,
        )?;
        let (x, y, s) = grid.argmax();
        println!(
            "k = {k:>4}: max S = {s:.4e} at phi_21 = {:.3} pi, phi_31 = {:.3} pi",
            x / PI,
            y / PI
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let rho = solve_analytic(&engine.with_dissipation_ratio(0.75))?;
        let grid = phase_distribution_grid(
            &rho,
            PhaseAxis::new(2, 1),
            PhaseAxis::new(3, 1),
            &PhaseVector::zeros(3),
            128,
        )?;
        grid.write_csv("{\"k\":0.75}", std::fs::File::create(&path)?)?;
        println!("grid written to {path}");
    }
    Ok(())
}
