//! Scaled refrigerator maximum as N grows, against its large-N limit.

use maser_sync::model::SystemParams;
use maser_sync::sync::{asymptotic_smax, closed_form_scaled_refrigerator};

fn main() -> maser_sync::Result<()> {
    let limit = asymptotic_smax(&SystemParams::reference(1))?;
    println!("limit = {limit:.6}");
    for n in [1, 2, 5, 10, 20, 50, 100, 200, 1000, 10000] {
        let p = SystemParams::reference(n);
        let scaled = closed_form_scaled_refrigerator(&p)?;
        println!(
            "N = {n:>5}: scaled S_max = {scaled:.6}  ({:+.2}% from the limit)",
            100.0 * (scaled - limit) / limit
        );
    }
    Ok(())
}
