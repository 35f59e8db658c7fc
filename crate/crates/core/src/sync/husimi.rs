use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use super::{HusimiAngles, PhaseVector};
use crate::error::{Error, Result};
use crate::model::DensityMatrix;

/// Largest dimension accepted by [`marginalize_husimi_numeric`].
pub const MAX_QUADRATURE_DIM: usize = 5;

/// Amplitudes of the SU(D) coherent state, one per level.
pub fn coherent_state(angles: &HusimiAngles) -> DVector<Complex64> {
    let d = angles.thetas.len() + 1;
    let mut out = DVector::zeros(d);
    let mut sin_prod = 1.0;
    for k in 0..d {
        let radial = if k + 1 < d {
            angles.thetas[k].cos() * sin_prod
        } else {
            sin_prod
        };
        out[k] = Complex64::from_polar(radial, angles.phases.level(k));
        if k + 1 < d {
            sin_prod *= angles.thetas[k].sin();
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_angles(rho: &DensityMatrix, angles: &HusimiAngles) -> Result<()> {
    let d = rho.dim();
    if angles.thetas.len() + 1 != d || angles.phases.len() + 1 != d {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            found: angles.thetas.len(),
        });
    }
    Ok(())
}

fn expectation(rho: &DensityMatrix, alpha: &DVector<Complex64>) -> f64 {
    (alpha.adjoint() * rho.matrix() * alpha)[(0, 0)].re
}

/// `Q = D!/π^(D-1) ⟨α|ρ|α⟩`.
pub fn husimi_q(rho: &DensityMatrix, angles: &HusimiAngles) -> Result<f64> {
    check_angles(rho, angles)?;
    let d = rho.dim();
    let alpha = coherent_state(angles);
    Ok(factorial(d) / PI.powi(d as i32 - 1) * expectation(rho, &alpha))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `Q` over the polar angles with the measure
/// `Π_l cos θ_l (sin θ_l)^(2D-2l-1) dθ_l` by iterated Gauss-Legendre
/// quadrature, then subtracts the uniform part `1/(2π)^(D-1)`.
pub fn marginalize_husimi_numeric(
    rho: &DensityMatrix,
    phases: &PhaseVector,
    quad_points: usize,
) -> Result<f64> {
    let d = rho.dim();
    if d > MAX_QUADRATURE_DIM {
        return Err(Error::Domain(format!(
            "quadrature marginal supports D <= {MAX_QUADRATURE_DIM}, got {d}"
        )));
    }
    if phases.len() + 1 != d {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            found: phases.len(),
        });
    }
    if quad_points == 0 {
        return Err(Error::Domain("quad_points must be positive".into()));
    }
    let uniform = 1.0 / TAU.powi(d as i32 - 1);
    if d == 1 {
        return Ok(husimi_q(rho, &HusimiAngles { thetas: vec![], phases: phases.clone() })? - uniform);
    }

    let (x, w) = gauss_legendre(quad_points);
    let thetas: Vec<f64> = x.iter().map(|t| FRAC_PI_2 * (t + 1.0) / 2.0).collect();
    let half_width = FRAC_PI_2 / 2.0;
    // Measure weight per angle index l (0-based): cos θ (sin θ)^(2D - 2l - 3).
    let weights: Vec<Vec<f64>> = (0..d - 1)
        .map(|l| {
            let power = (2 * d - 2 * l - 3) as i32;
            thetas
                .iter()
                .zip(&w)
                .map(|(t, wi)| wi * half_width * t.cos() * t.sin().powi(power))
                .collect()
        })
        .collect();

    let dims = d - 1;
    let mut idx = vec![0usize; dims];
    let mut total = 0.0;
    let mut angles = HusimiAngles {
        thetas: vec![0.0; dims],
        phases: phases.clone(),
    };
    loop {
        let mut weight = 1.0;
        for (l, i) in idx.iter().enumerate() {
            angles.thetas[l] = thetas[*i];
            weight *= weights[l][*i];
        }
        total += weight * husimi_q(rho, &angles)?;

        let mut carry = 0;
        while carry < dims {
            idx[carry] += 1;
            if idx[carry] < quad_points {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == dims {
            break;
        }
    }
    Ok(total - uniform)
}
