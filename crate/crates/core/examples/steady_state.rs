//! Solves the steady state numerically and compares it with the closed form.
//!
//! Run with `cargo run --example steady_state -- [n_deg] [n_h/n_c]`.

use maser_sync::liouvillian::build_liouvillian;
use maser_sync::model::{regime_classify, SystemParams};
use maser_sync::steady_state::{residual, solve_analytic, solve_numeric};

fn main() -> maser_sync::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_deg: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let ratio: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);

    let p = SystemParams::reference(n_deg).with_bath_ratio(ratio);
    let generator = build_liouvillian(&p)?;
    let numeric = solve_numeric(&generator)?;
    let analytic = solve_analytic(&p)?;

    println!("N = {n_deg}, n_h/n_c = {ratio} ({:?})", regime_classify(&p));
    println!("populations:");
    for k in 0..p.dim() {
        println!("  rho[{k}][{k}] = {:.12}", numeric.get(k, k).re);
    }
    if n_deg >= 2 {
        println!("drive coherence    rho[1][2] = {:.6e}", numeric.get(1, 2));
        println!("manifold coherence rho[2][3] = {:.6e}", numeric.get(2, 3));
    }
    println!(
        "max |numeric - analytic| = {:.3e}",
        (numeric.matrix() - analytic.matrix()).camax()
    );
    println!("residual |L(rho)|_max   = {:.3e}", residual(&generator, &numeric)?);
    Ok(())
}
