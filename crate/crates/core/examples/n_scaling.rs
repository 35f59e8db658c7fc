//! Scaled maximum versus the number of degenerate levels under random drives.
//!
//! `cargo run --release --example n_scaling -- [realizations] [n_max] [out_dir]`

use std::f64::consts::PI;

use maser_sync::experiments::{
    optimal_phase_cloud, scaling_with_n, write_phases_csv, write_scaling_csv, ScalingSpec,
};
use maser_sync::model::Regime;

fn main() -> maser_sync::Result<()> {
    let mut args = std::env::args().skip(1);
    let realizations = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let n_max = args.next().and_then(|s| s.parse().ok()).unwrap_or(12);
    let out_dir = args.next();

    for regime in [Regime::Engine, Regime::Refrigerator] {
        let spec = ScalingSpec::for_regime(regime, 2, n_max, realizations, 7);
        let r = scaling_with_n(&spec)?;
        println!("{regime:?}: alpha = {:.3} (r^2 = {:.3})", r.alpha, r.r_squared);
        for (i, n) in r.n_values.iter().enumerate() {
            println!(
                "  N = {n:>2}: S_max = {:.4e} +- {:.1e}, entrainment = {:.4e}",
                r.smax_scaled_mean[i], r.smax_scaled_std[i], r.entrainment_mean[i]
            );
        }
        let cloud = optimal_phase_cloud(&r, n_max)?;
        let (c, s) = cloud
            .iter()
            .flat_map(|p| p.phases.iter())
            .fold((0.0, 0.0), |(c, s), phi| (c + phi.cos(), s + phi.sin()));
        let count = cloud.iter().map(|p| p.phases.len()).sum::<usize>() as f64;
        println!(
            "  phases at N = {n_max}: mean direction {:.3} pi, circular variance {:.3}",
            s.atan2(c).rem_euclid(2.0 * PI) / PI,
            1.0 - (c * c + s * s).sqrt() / count
        );
        if let Some(dir) = &out_dir {
            let dir = std::path::Path::new(dir).join(format!("{regime:?}").to_lowercase());
            std::fs::create_dir_all(&dir)?;
            let prov = serde_json::to_string(&spec)?;
            write_scaling_csv(&r, &prov, std::fs::File::create(dir.join("fig3_scaling.csv"))?)?;
            write_phases_csv(&cloud, &prov, std::fs::File::create(dir.join("fig3_phases.csv"))?)?;
        }
    }
    Ok(())
}
