//! Entrainment against mutual coupling for two degenerate levels.
//!
//! Scans the dissipation-to-driving ratio `k` in the engine regime and
//! compares the piecewise closed form with the multi-start optimizer.

use std::f64::consts::PI;

use maser_sync::model::SystemParams;
use maser_sync::steady_state::solve_analytic;
use maser_sync::sync::{closed_form_smax_n2, maximize_sync, SyncOptions};

fn main() -> maser_sync::Result<()> {
    let engine = SystemParams::reference(2).with_bath_ratio(10.0);
    println!("{:>5} {:>14} {:>14} {:>10}  branch / optimal (phi_21, phi_31) in units of pi", "k", "closed", "optimizer", "diff");
    for i in 1..=16 {
        let k = 0.25 * i as f64;
        let p = engine.clone().with_dissipation_ratio(k);
        let closed = closed_form_smax_n2(&p)?;
        let numeric = maximize_sync(&solve_analytic(&p)?, &SyncOptions::default())?;
        let sets: Vec<String> = numeric
            .optimal_phase_sets
            .iter()
            .map(|s| format!("({:.3}, {:.3})", s.level(2) / PI, s.level(3) / PI))
            .collect();
        println!(
            "{k:>5.2} {:>14.6e} {:>14.6e} {:>10.1e}  {:?} {}",
            closed.s_max,
            numeric.s_max,
            (closed.s_max - numeric.s_max).abs(),
            closed.branch,
            sets.join(" ")
        );
    }
    Ok(())
}
