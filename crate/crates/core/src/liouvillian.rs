//! Rotating-frame generator of the maser as an explicit superoperator.
//!
//! Density matrices are vectorized by stacking columns: entry `(r, c)` of a
//! `D x D` matrix sits at index `c * D + r`. Under this convention
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemParams};

/// Dense storage limit on the number of degenerate levels.
pub const MAX_DENSE_DEG: usize = 256;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn vec_index(row: usize, col: usize, dim: usize) -> usize {
    col * dim + row
}

pub fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    // nalgebra stores column-major, which is exactly column stacking.
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Linear map on vectorized `D x D` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn from_matrix(dim: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Max modulus of `tr(S(X))` coefficients, i.e. of the trace row times the matrix.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let s: Complex64 = (0..d).map(|k| self.matrix[(vec_index(k, k, d), col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    /// Eigenvalues of the superoperator via a complex Schur decomposition.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        let schur = nalgebra::Schur::try_new(self.matrix.clone(), 1e-15, 100_000)
            .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().copied().collect())
    }

    /// Number of eigenvalues with modulus below `tol`.
    pub fn null_eigenvalue_count(&self, tol: f64) -> Result<usize> {
        Ok(self.spectrum()?.iter().filter(|z| z.norm() < tol).count())
    }

    /// Writes every nonzero entry as `row,col,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,re,im")?;
        let n = self.matrix.nrows();
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix[(r, c)];
                if z != Complex64::new(0.0, 0.0) {
                    writeln!(w, "{r},{c},{:.17e},{:.17e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }

    fn add(&mut self, row: usize, col: usize, value: Complex64) {
        self.matrix[(row, col)] += value;
    }

    /// Adds `rate * (2 XρX† - {X†X, ρ})` for the jump `X = |to⟩⟨from|`.
    fn add_jump(&mut self, to: usize, from: usize, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let d = self.dim;
        let gain = Complex64::new(2.0 * rate, 0.0);
        self.add(vec_index(to, to, d), vec_index(from, from, d), gain);
        // X†X = |from⟩⟨from| acts from both sides.
        for k in 0..d {
            let loss = Complex64::new(-rate, 0.0);
            self.add(vec_index(from, k, d), vec_index(from, k, d), loss);
            self.add(vec_index(k, from, d), vec_index(k, from, d), loss);
        }
    }

    /// Adds `-i[H, ρ]`.
    fn add_hamiltonian(&mut self, h: &DMatrix<Complex64>) {
        let d = self.dim;
        for r in 0..d {
            for c in 0..d {
                let out = vec_index(r, c, d);
                for k in 0..d {
                    let h_rk = h[(r, k)];
                    if h_rk != Complex64::new(0.0, 0.0) {
                        self.add(out, vec_index(k, c, d), -I * h_rk);
                    }
                    let h_kc = h[(k, c)];
                    if h_kc != Complex64::new(0.0, 0.0) {
                        self.add(out, vec_index(r, k, d), I * h_kc);
                    }
                }
            }
        }
    }
}

fn check_size(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.n_deg > MAX_DENSE_DEG {
        return Err(Error::TooLarge {
            n_deg: p.n_deg,
            limit: MAX_DENSE_DEG,
        });
    }
    Ok(())
}

/// `H0 - H̃ + Ṽ` in the rotating frame of the drive.
pub fn build_rotating_hamiltonian(p: &SystemParams) -> Result<DMatrix<Complex64>> {
    check_size(p)?;
    let d = p.dim();
    let half = p.drive_freq / 2.0;
    let mut h = DMatrix::zeros(d, d);
    h[(1, 1)] = Complex64::new(p.omega1 + half, 0.0);
    for (offset, amp) in p.drive_amps.iter().enumerate() {
        let j = offset + 2;
        h[(j, j)] = Complex64::new(p.omega_deg - half, 0.0);
        h[(1, j)] = Complex64::new(*amp, 0.0);
        h[(j, 1)] = Complex64::new(*amp, 0.0);
    }
    Ok(h)
}

/// Hot bath couples `|0⟩ ↔ |j⟩` for every degenerate level, cold bath couples `|0⟩ ↔ |1⟩`.
pub fn build_dissipator(p: &SystemParams) -> Result<Superoperator> {
    check_size(p)?;
    Ok(assemble_dissipator(
        p.dim(),
        [p.rate_cold_down(), p.rate_cold_up()],
        [p.rate_hot_down(), p.rate_hot_up()],
    ))
}

/// Rates are `[down, up]` for each bath.
fn assemble_dissipator(dim: usize, cold: [f64; 2], hot: [f64; 2]) -> Superoperator {
    let mut s = Superoperator::zeros(dim);
    s.add_jump(0, 1, cold[0]);
    s.add_jump(1, 0, cold[1]);
    for j in 2..dim {
        s.add_jump(0, j, hot[0]);
        s.add_jump(j, 0, hot[1]);
    }
    s
}

/// Generator of `dρ/dt = -i[H, ρ] + D[ρ]` in the rotating frame.
pub fn build_liouvillian(p: &SystemParams) -> Result<Superoperator> {
    let h = build_rotating_hamiltonian(p)?;
    let mut s = build_dissipator(p)?;
    s.add_hamiltonian(&h);
    Ok(s)
}

pub fn apply(s: &Superoperator, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    apply_matrix(s, rho.matrix())
}

/// Same as [`apply`] for an arbitrary square matrix.
pub fn apply_matrix(s: &Superoperator, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if m.nrows() != s.dim || m.ncols() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            found: m.nrows(),
        });
    }
    let out = &s.matrix * vectorize(m);
    Ok(unvectorize(&out, s.dim))
}
