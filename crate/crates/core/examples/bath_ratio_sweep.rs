//! Maximum and entrainment part across n_h / n_c for two degenerate levels.
//!
//! Pass a path to also write the table as CSV.

use maser_sync::experiments::{log_space, sweep_bath_ratio, write_bath_csv, SweepAxis, SweepSpec};
use maser_sync::model::SystemParams;
use maser_sync::sync::SyncOptions;

fn main() -> maser_sync::Result<()> {
    let spec = SweepSpec {
        base_params: SystemParams::reference(2),
        axis: SweepAxis::BathRatio,
        values: log_space(0.1, 100.0, 31),
        seed: 1,
    };
    let rows = sweep_bath_ratio(&spec, &SyncOptions::default())?;
    println!("{:>10} {:>13} {:>13} {:>13}  relation", "n_h/n_c", "s_max", "closed form", "entrainment");
    for r in &rows {
        let (s, e) = (r.s_max.unwrap_or(f64::NAN), r.entrainment.unwrap_or(f64::NAN));
        let relation = if s < 1e-10 {
            "none"
        } else if s > e {
            "cooperation"
        } else {
            "competition"
        };
        println!(
            "{:>10.4} {s:>13.5e} {:>13.5e} {e:>13.5e}  {relation}",
            r.bath_ratio,
            r.s_max_closed_form.unwrap_or(f64::NAN)
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let prov = serde_json::to_string(&spec)?;
        write_bath_csv(&rows, &prov, std::fs::File::create(&path)?)?;
        println!("written to {path}");
    }
    Ok(())
}
