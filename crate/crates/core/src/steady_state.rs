//! Steady states of the maser generator.
//!
//! [`solve_numeric`] replaces the ground-population equation with the trace
//! constraint and solves the square system. [`solve_nullspace`] extracts the
//! null vector from a singular value decomposition instead and serves as an
//! independent cross-check. [`solve_analytic`] assembles the closed-form
//! solution for homogeneous, resonant driving.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{apply, unvectorize, vec_index, Superoperator};
use crate::model::{hermiticity_error, DensityMatrix, SystemParams, PSD_TOL, TRACE_TOL};

/// Bound on `|ρ - ρ†|` before the Hermitian part is taken.
pub const PRE_SCRUB_ASYMMETRY: f64 = 1e-11;
/// Certification bound on `max |L(ρ)|`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Pivot ratio below which the constrained system is treated as singular.
const PIVOT_RATIO_TOL: f64 = 1e-13;

/// Steady state from the trace-constrained linear system.
pub fn solve_numeric(s: &Superoperator) -> Result<DensityMatrix> {
    let d = s.dim();
    let n = d * d;
    let mut m = s.matrix().clone();
    // Rows of the diagonal entries sum to zero, so the first one is redundant.
    for col in 0..n {
        m[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..d {
        m[(0, vec_index(k, k, d))] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = DVector::zeros(n);
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = m.lu();
    let u_diag = lu.u().diagonal();
    let max_pivot = u_diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_pivot = u_diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !(max_pivot > 0.0) || min_pivot < PIVOT_RATIO_TOL * max_pivot {
        return Err(Error::NonUniqueSteadyState(format!(
            "trace-constrained system is singular (pivot ratio {:e})",
            min_pivot / max_pivot
        )));
    }
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("LU solve failed".into()))?;
    let rho = certify(s, unvectorize(&x, d))?;
    let res = residual(s, &rho)?;
    if res > RESIDUAL_TOL {
        return Err(Error::Numeric(format!("steady-state residual {res:e} exceeds {RESIDUAL_TOL:e}")));
    }
    Ok(rho)
}

/// Steady state from the right singular vector of the smallest singular value.
pub fn solve_nullspace(s: &Superoperator) -> Result<DensityMatrix> {
    let d = s.dim();
    let svd = nalgebra::SVD::try_new(s.matrix().clone(), false, true, 1e-15, 100_000)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD returned no right vectors".into()))?;
    let sv = &svd.singular_values;
    let (imin, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numeric("empty superoperator".into()))?;
    let scale = sv.max().max(1.0);
    let tiny = sv.iter().filter(|v| **v < 1e-9 * scale).count();
    if tiny > 1 {
        return Err(Error::NonUniqueSteadyState(format!(
            "{tiny} singular values below {:e}",
            1e-9 * scale
        )));
    }
    let x: DVector<Complex64> = v_t.row(imin).adjoint();
    let m = unvectorize(&x, d);
    let tr: Complex64 = m.diagonal().iter().sum();
    if tr.norm() < 1e-14 {
        return Err(Error::Numeric("null vector has zero trace".into()));
    }
    certify(s, m / tr)
}

/// Hermitian scrub plus the density-matrix invariants.
fn certify(s: &Superoperator, m: DMatrix<Complex64>) -> Result<DensityMatrix> {
    let asym = hermiticity_error(&m);
    if asym > PRE_SCRUB_ASYMMETRY {
        return Err(Error::Numeric(format!(
            "steady state asymmetry {asym:e} exceeds {PRE_SCRUB_ASYMMETRY:e}"
        )));
    }
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let rho = DensityMatrix::from_hermitian(h)?;
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::Numeric(format!("steady state trace {tr}")));
    }
    let min_eig = rho.min_eigenvalue();
    if min_eig < -PSD_TOL {
        return Err(Error::Numeric(format!(
            "steady state has negative eigenvalue {min_eig:e}"
        )));
    }
    debug_assert_eq!(rho.dim(), s.dim());
    Ok(rho)
}

/// Max-norm of `L(ρ)`.
pub fn residual(s: &Superoperator, rho: &DensityMatrix) -> Result<f64> {
    Ok(apply(s, rho)?.camax())
}

/// `F = quadratic N² + linear N + constant`, the common denominator of the
/// closed-form steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCoefficients {
    pub quadratic: f64,
    pub linear: f64,
    pub constant: f64,
    pub value: f64,
}

fn analytic_drive(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if !p.is_resonant() {
        return Err(Error::NotApplicable(format!(
            "closed forms require zero detuning, got {}",
            p.detuning
        )));
    }
    p.homogeneous_drive().ok_or_else(|| {
        Error::NotApplicable("closed forms require a homogeneous drive".into())
    })
}

pub fn analytic_coefficients(p: &SystemParams) -> Result<AnalyticCoefficients> {
    let lambda = analytic_drive(p)?;
    Ok(coefficients(p, lambda))
}

fn coefficients(p: &SystemParams, lambda: f64) -> AnalyticCoefficients {
    let (gh, gc, nh, nc) = (p.gamma_h, p.gamma_c, p.n_h, p.n_c);
    let l2 = lambda * lambda;
    let decay = gc * (1.0 + nc) + gh * (1.0 + nh);
    let quadratic = l2 * nh * decay;
    let linear = l2 * (gc * (1.0 + 3.0 * nc + 2.0 * nh * nc) + gh * (1.0 + nh) * (1.0 + 2.0 * nh))
        + nh * gh * gc * (1.0 + nh) * (1.0 + nc) * decay;
    let constant = gh * gc * (1.0 + nh).powi(2) * (1.0 + 2.0 * nc) * decay;
    let n = p.n_deg as f64;
    AnalyticCoefficients {
        quadratic,
        linear,
        constant,
        value: quadratic * n * n + linear * n + constant,
    }
}

/// Closed-form steady state for homogeneous drive at resonance.
pub fn solve_analytic(p: &SystemParams) -> Result<DensityMatrix> {
    let lambda = analytic_drive(p)?;
    let f = coefficients(p, lambda).value;
    let (gh, gc, nh, nc) = (p.gamma_h, p.gamma_c, p.n_h, p.n_c);
    let n = p.n_deg as f64;
    let l2 = lambda * lambda;
    let decay = gc * (1.0 + nc) + gh * (1.0 + nh);

    let drive_coh = Complex64::new(0.0, lambda * (nc - nh) * (1.0 + nh) * gc * gh / f);
    let manifold_coh = Complex64::new(l2 * gc * (nc - nh) / f, 0.0);
    let pop_excited =
        (n * l2 * (1.0 + nh) * (nh * gh + nc * gc) + gc * gh * nc * (1.0 + nh).powi(2) * decay) / f;
    let pop_manifold =
        ((n * l2 * nh + gc * gh * nh * (1.0 + nh) * (1.0 + nc)) * decay + l2 * gc * (nc - nh)) / f;
    let pop_ground = 1.0 - pop_excited - n * pop_manifold;

    let d = p.dim();
    let mut m = DMatrix::zeros(d, d);
    m[(0, 0)] = Complex64::new(pop_ground, 0.0);
    m[(1, 1)] = Complex64::new(pop_excited, 0.0);
    for j in 2..d {
        m[(j, j)] = Complex64::new(pop_manifold, 0.0);
        m[(1, j)] = drive_coh;
        m[(j, 1)] = drive_coh.conj();
        for l in 2..d {
            if l != j {
                m[(j, l)] = manifold_coh;
            }
        }
    }
    DensityMatrix::new(m)
}

/// Writes `row,col,re,im` for every entry, preceded by a provenance comment line.
pub fn write_csv<W: Write>(rho: &DensityMatrix, provenance: &str, mut w: W) -> Result<()> {
    writeln!(w, "# params: {provenance}")?;
    writeln!(w, "row,col,re,im")?;
    let d = rho.dim();
    for r in 0..d {
        for c in 0..d {
            let z = rho.get(r, c);
            writeln!(w, "{r},{c},{:.17e},{:.17e}", z.re, z.im)?;
        }
    }
    Ok(())
}
