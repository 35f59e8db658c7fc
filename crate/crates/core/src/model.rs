//! Physical parameters of the degenerate maser and the density-matrix type.
//!
//! Levels are ordered `|0⟩` (ground), `|1⟩` (first excited), then the `N`
//! degenerate levels `|2⟩ … |N+1⟩`. Energies and rates are expressed in units
//! of the first transition frequency `omega1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether all drive amplitudes are equal.
pub const HOMOGENEOUS_TOL: f64 = 1e-12;

/// Full parameter set of the maser. Serializes to a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Number of degenerate upper levels.
    pub n_deg: usize,
    pub omega1: f64,
    /// Energy shared by the degenerate manifold.
    pub omega_deg: f64,
    pub drive_freq: f64,
    /// Real drive amplitude on each `|1⟩ ↔ |j⟩` transition, `j = 2..=N+1`.
    pub drive_amps: Vec<f64>,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub n_h: f64,
    pub n_c: f64,
    /// `(omega_deg - omega1) - drive_freq`; must agree with the other fields.
    pub detuning: f64,
}

impl SystemParams {
    /// Resonantly driven maser (`drive_freq = omega_deg - omega1`).
    #[allow(clippy::too_many_arguments)]
    pub fn resonant(
        omega1: f64,
        omega_deg: f64,
        drive_amps: Vec<f64>,
        gamma_h: f64,
        gamma_c: f64,
        n_h: f64,
        n_c: f64,
    ) -> Self {
        Self {
            n_deg: drive_amps.len(),
            omega1,
            omega_deg,
            drive_freq: omega_deg - omega1,
            drive_amps,
            gamma_h,
            gamma_c,
            n_h,
            n_c,
            detuning: 0.0,
        }
    }

    /// Reference working point: `omega_deg = 3`,
    /// `gamma_c = 0.2`, `gamma_h = 0.05`, `n_c = 0.5`, homogeneous drive `0.1`.
    /// `n_h` defaults to `0.25` (refrigerator).
    pub fn reference(n_deg: usize) -> Self {
        Self::resonant(1.0, 3.0, vec![0.1; n_deg], 0.05, 0.2, 0.25, 0.5)
    }

    /// Sets `n_h = ratio * n_c`.
    pub fn with_bath_ratio(mut self, ratio: f64) -> Self {
        self.n_h = ratio * self.n_c;
        self
    }

    pub fn with_homogeneous_drive(mut self, amp: f64) -> Self {
        self.drive_amps = vec![amp; self.n_deg];
        self
    }

    /// Chooses the homogeneous drive so that `gamma_h (1 + n_h) / lambda = k`.
    pub fn with_dissipation_ratio(self, k: f64) -> Self {
        let amp = self.gamma_h * (1.0 + self.n_h) / k;
        self.with_homogeneous_drive(amp)
    }

    pub fn with_drive_freq(mut self, drive_freq: f64) -> Self {
        self.drive_freq = drive_freq;
        self.detuning = (self.omega_deg - self.omega1) - drive_freq;
        self
    }

    pub fn dim(&self) -> usize {
        self.n_deg + 2
    }

    /// `sqrt(Σ λ_j²)`.
    pub fn effective_drive(&self) -> f64 {
        self.drive_amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// The common drive amplitude when every `λ_j` is equal, `None` otherwise.
    pub fn homogeneous_drive(&self) -> Option<f64> {
        let first = *self.drive_amps.first()?;
        let scale = self.drive_amps.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        self.drive_amps
            .iter()
            .all(|a| (a - first).abs() <= HOMOGENEOUS_TOL * scale)
            .then_some(first)
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning == 0.0
    }

    pub fn rate_hot_down(&self) -> f64 {
        self.gamma_h * (1.0 + self.n_h)
    }

    pub fn rate_hot_up(&self) -> f64 {
        self.gamma_h * self.n_h
    }

    pub fn rate_cold_down(&self) -> f64 {
        self.gamma_c * (1.0 + self.n_c)
    }

    pub fn rate_cold_up(&self) -> f64 {
        self.gamma_c * self.n_c
    }

    pub fn validate(&self) -> Result<()> {
        let violations = validate_params(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(violations))
        }
    }
}

/// One violated parameter invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Returns every violated invariant; an empty list means the parameters are usable.
pub fn validate_params(p: &SystemParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let finite = |name: &str, v: f64, out: &mut Vec<Violation>| {
        if !v.is_finite() {
            out.push(Violation::new(name, format!("must be finite, got {v}")));
            false
        } else {
            true
        }
    };

    if p.n_deg < 1 {
        out.push(Violation::new("n_deg", "must be at least 1"));
    }
    if finite("omega1", p.omega1, &mut out) && p.omega1 <= 0.0 {
        out.push(Violation::new("omega1", format!("must be positive, got {}", p.omega1)));
    }
    if finite("omega_deg", p.omega_deg, &mut out) && p.omega_deg <= p.omega1 {
        out.push(Violation::new(
            "omega_deg",
            format!("must exceed omega1 ({}), got {}", p.omega1, p.omega_deg),
        ));
    }
    finite("drive_freq", p.drive_freq, &mut out);
    if finite("gamma_h", p.gamma_h, &mut out) && p.gamma_h <= 0.0 {
        out.push(Violation::new("gamma_h", format!("must be positive, got {}", p.gamma_h)));
    }
    if finite("gamma_c", p.gamma_c, &mut out) && p.gamma_c <= 0.0 {
        out.push(Violation::new("gamma_c", format!("must be positive, got {}", p.gamma_c)));
    }
    if finite("n_h", p.n_h, &mut out) && p.n_h < 0.0 {
        out.push(Violation::new("n_h", format!("must be nonnegative, got {}", p.n_h)));
    }
    if finite("n_c", p.n_c, &mut out) && p.n_c < 0.0 {
        out.push(Violation::new("n_c", format!("must be nonnegative, got {}", p.n_c)));
    }
    if p.drive_amps.len() != p.n_deg {
        out.push(Violation::new(
            "drive_amps",
            format!("expected {} entries, got {}", p.n_deg, p.drive_amps.len()),
        ));
    }
    if p.drive_amps.iter().any(|a| !a.is_finite()) {
        out.push(Violation::new("drive_amps", "all entries must be finite"));
    }
    if finite("detuning", p.detuning, &mut out) {
        let expected = (p.omega_deg - p.omega1) - p.drive_freq;
        let scale = p.omega_deg.abs().max(p.drive_freq.abs()).max(1.0);
        if (p.detuning - expected).abs() > 1e-12 * scale {
            out.push(Violation::new(
                "detuning",
                format!("inconsistent with (omega_deg - omega1) - drive_freq = {expected}"),
            ));
        }
    }
    out
}

/// Bose-Einstein occupation `1 / (exp(beta * omega) - 1)`.
pub fn bose_occupation(beta: f64, omega: f64) -> Result<f64> {
    if !(beta > 0.0) || !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "bose_occupation needs beta > 0 and omega > 0, got beta = {beta}, omega = {omega}"
        )));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Engine,
    Refrigerator,
    Neutral,
}

/// Engine under population inversion (`n_h > n_c`), refrigerator otherwise.
pub fn regime_classify(p: &SystemParams) -> Regime {
    if p.n_h > p.n_c {
        Regime::Engine
    } else if p.n_h < p.n_c {
        Regime::Refrigerator
    } else {
        Regime::Neutral
    }
}

/// `k = gamma_h (1 + n_h) / |lambda|` for a homogeneous, nonzero drive.
pub fn dissipation_to_driving_ratio(p: &SystemParams) -> Result<f64> {
    let amp = p.homogeneous_drive().ok_or_else(|| {
        Error::NotApplicable("dissipation-to-driving ratio needs a homogeneous drive".into())
    })?;
    if amp == 0.0 {
        return Err(Error::NotApplicable(
            "dissipation-to-driving ratio is undefined for a zero drive".into(),
        ));
    }
    Ok(p.rate_hot_down() / amp.abs())
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// A Hermitian, unit-trace, positive semidefinite matrix in the fixed level basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks all three invariants.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_hermitian(data)?;
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("trace must be 1, got {tr}")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::Domain(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(rho)
    }

    /// Checks squareness and Hermiticity only. Used for synthetic matrices in
    /// measure calculations where trace and positivity do not matter.
    pub fn from_hermitian(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                found: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::Domain("density matrix must have dimension >= 1".into()));
        }
        let err = hermiticity_error(&data);
        if err > HERMITIAN_TOL {
            return Err(Error::Domain(format!("matrix is not Hermitian (error {err:e})")));
        }
        Ok(Self { data })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        Self {
            data: DMatrix::from_diagonal_element(dim, dim, Complex64::new(w, 0.0)),
        }
    }

    /// `|k⟩⟨k|`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut data = DMatrix::zeros(dim, dim);
        data[(k, k)] = Complex64::new(1.0, 0.0);
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.data)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `true` when every off-diagonal entry has modulus at most `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|r| (0..d).all(|c| r == c || self.data[(r, c)].norm() <= tol))
    }
}

/// Max entrywise `|m - m†|`.
pub fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut err = 0.0f64;
    for r in 0..d {
        for c in 0..m.ncols() {
            err = err.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    err
}

/// Eigenvalues of a Hermitian matrix (the imaginary parts of the diagonal are ignored).
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::from(&self.data).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        let m = repr.to_matrix().map_err(serde::de::Error::custom)?;
        DensityMatrix::from_hermitian(m).map_err(serde::de::Error::custom)
    }
}

/// JSON layout for complex matrices: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<Complex64>> for MatrixRepr {
    fn from(m: &DMatrix<Complex64>) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dim;
        let ok = self.re.len() == d
            && self.im.len() == d
            && self.re.iter().chain(&self.im).all(|row| row.len() == d);
        if !ok {
            return Err(Error::Domain(format!("matrix payload is not {d}x{d}")));
        }
        Ok(DMatrix::from_fn(d, d, |r, c| Complex64::new(self.re[r][c], self.im[r][c])))
    }
}
