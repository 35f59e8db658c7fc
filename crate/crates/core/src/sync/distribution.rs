use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{pair_prefactor, wrap_phase, PhaseVector};
use crate::error::{Error, Result};
use crate::model::DensityMatrix;

fn check_len(rho: &DensityMatrix, phases: &PhaseVector) -> Result<()> {
    if phases.len() + 1 != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim() - 1,
            found: phases.len(),
        });
    }
    Ok(())
}

/// `1/(2^(D+1) π^(D-2)) Σ_{n≠m} ρ_nm e^{i(φ_m - φ_n)}`, evaluated literally.
pub fn phase_distribution_full_sum(rho: &DensityMatrix, phases: &PhaseVector) -> Result<f64> {
    check_len(rho, phases)?;
    let d = rho.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..d {
        for m in 0..d {
            if n != m {
                let dphi = phases.level(m) - phases.level(n);
                acc += rho.get(n, m) * Complex64::from_polar(1.0, dphi);
            }
        }
    }
    Ok(acc.re / (2f64.powi(d as i32 + 1) * PI.powi(d as i32 - 2)))
}

pub(super) fn pair_sum(rho: &DensityMatrix, phases: &PhaseVector) -> f64 {
    let d = rho.dim();
    let mut acc = 0.0;
    for n in 0..d {
        for m in n + 1..d {
            let z = rho.get(n, m);
            if z.norm() > 0.0 {
                acc += z.norm() * (phases.level(m) - phases.level(n) + z.arg()).cos();
            }
        }
    }
    pair_prefactor(d) * acc
}

/// Phase quasi-distribution `S(φ)` on the `(D-1)`-torus.
///
/// Computed in pair form and cross-checked against the full double sum.
pub fn phase_distribution(rho: &DensityMatrix, phases: &PhaseVector) -> Result<f64> {
    let full = phase_distribution_full_sum(rho, phases)?;
    let pairs = pair_sum(rho, phases);
    if (full - pairs).abs() > 1e-12 {
        return Err(Error::Numeric(format!(
            "pair form {pairs:e} and full sum {full:e} disagree"
        )));
    }
    Ok(pairs)
}

/// Grid axis: the phase of `level` measured from `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseAxis {
    pub level: usize,
    pub reference: usize,
}

impl PhaseAxis {
    pub fn new(level: usize, reference: usize) -> Self {
        Self { level, reference }
    }

    pub fn label(&self) -> String {
        format!("phi_{}{}", self.level, self.reference)
    }
}

/// `S` sampled over two relative phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub row_axis: PhaseAxis,
    pub col_axis: PhaseAxis,
    /// Axis values `2π k / resolution`, shared by rows and columns.
    pub values: Vec<f64>,
    /// `data[i][j]` is `S` at row value `values[i]` and column value `values[j]`.
    pub data: Vec<Vec<f64>>,
}

impl PhaseGrid {
    /// `(row value, column value, S)` at the largest grid entry.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > best.2 {
                    best = (self.values[i], self.values[j], *v);
                }
            }
        }
        best
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    /// First line carries provenance, second the column axis values; each
    /// following line starts with its row axis value.
    pub fn write_csv<W: Write>(&self, provenance: &str, mut w: W) -> Result<()> {
        writeln!(w, "# params: {provenance}")?;
        write!(w, "{}\\{}", self.row_axis.label(), self.col_axis.label())?;
        for v in &self.values {
            write!(w, ",{v:.17e}")?;
        }
        writeln!(w)?;
        for (v, row) in self.values.iter().zip(&self.data) {
            write!(w, "{v:.17e}")?;
            for s in row {
                write!(w, ",{s:.17e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Samples `S` over two relative phases, holding the other levels at `fixed`.
pub fn phase_distribution_grid(
    rho: &DensityMatrix,
    row_axis: PhaseAxis,
    col_axis: PhaseAxis,
    fixed: &PhaseVector,
    resolution: usize,
) -> Result<PhaseGrid> {
    check_len(rho, fixed)?;
    let d = rho.dim();
    if resolution < 8 {
        return Err(Error::Domain(format!("grid resolution must be >= 8, got {resolution}")));
    }
    for axis in [row_axis, col_axis] {
        if axis.level == 0 || axis.level >= d || axis.reference >= d || axis.level == axis.reference
        {
            return Err(Error::InvalidIndex(format!(
                "axis {} is not a valid relative phase for dimension {d}",
                axis.label()
            )));
        }
    }
    let touches = |a: PhaseAxis, b: PhaseAxis| a.level == b.level || a.reference == b.level;
    if touches(row_axis, col_axis) || touches(col_axis, row_axis) {
        return Err(Error::InvalidIndex(format!(
            "axes {} and {} are not independent",
            row_axis.label(),
            col_axis.label()
        )));
    }

    let values: Vec<f64> = (0..resolution)
        .map(|k| TAU * k as f64 / resolution as f64)
        .collect();
    let mut phases = fixed.as_slice().to_vec();
    let mut data = Vec::with_capacity(resolution);
    for x in &values {
        let mut row = Vec::with_capacity(resolution);
        for y in &values {
            phases[row_axis.level - 1] = wrap_phase(fixed.level(row_axis.reference) + x);
            phases[col_axis.level - 1] = wrap_phase(fixed.level(col_axis.reference) + y);
            row.push(pair_sum(rho, &PhaseVector::new(phases.clone())));
        }
        data.push(row);
    }
    Ok(PhaseGrid {
        row_axis,
        col_axis,
        values,
        data,
    })
}
