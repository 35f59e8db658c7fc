use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::pair_sum;
use super::{
    entrainment_contribution, scale_factor, wrap_phase, Branch, PhaseVector, SyncResult,
};
use crate::error::{Error, Result};
use crate::model::DensityMatrix;

/// Un-prefixed amplitude `Σ|ρ_nm| cos(..)` below which a state counts as diagonal.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-12;

/// Coherences smaller than this fraction of the largest are ignored by the ascent.
const EDGE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncOptions {
    pub starts: usize,
    /// Optima closer than `10 * tol` on the torus are merged.
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for SyncOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            tol: 1e-5,
            seed: 0,
            max_iter: 2000,
            grad_tol: 1e-12,
        }
    }
}

struct Edge {
    lo: usize,
    hi: usize,
    weight: f64,
    offset: f64,
}

/// Normalized objective `Σ w cos(φ_hi - φ_lo + Φ)` over the free levels.
struct Objective {
    dim: usize,
    edges: Vec<Edge>,
    /// Position of each level in the variable vector, `None` when pinned at 0.
    slot: Vec<Option<usize>>,
    nvar: usize,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Objective {
    fn new(rho: &DensityMatrix) -> Option<(Self, f64)> {
        let dim = rho.dim();
        let mut raw = Vec::new();
        for n in 0..dim {
            for m in n + 1..dim {
                let z = rho.get(n, m);
                raw.push((n, m, z.norm(), z.arg()));
            }
        }
        let largest = raw.iter().map(|e| e.2).fold(0.0, f64::max);
        if largest == 0.0 {
            return None;
        }
        raw.retain(|e| e.2 > EDGE_CUTOFF * largest);
        let total: f64 = raw.iter().map(|e| e.2).sum();

        let mut parent: Vec<usize> = (0..dim).collect();
        for &(n, m, _, _) in &raw {
            let (a, b) = (find(&mut parent, n), find(&mut parent, m));
            // Keep the lowest level as the root.
            if a < b {
                parent[b] = a;
            } else if b < a {
                parent[a] = b;
            }
        }
        let mut slot = vec![None; dim];
        let mut nvar = 0;
        let mut touched = vec![false; dim];
        for &(n, m, _, _) in &raw {
            touched[n] = true;
            touched[m] = true;
        }
        for l in 0..dim {
            if touched[l] && find(&mut parent, l) != l {
                slot[l] = Some(nvar);
                nvar += 1;
            }
        }
        let edges = raw
            .into_iter()
            .map(|(lo, hi, r, offset)| Edge {
                lo,
                hi,
                weight: r / total,
                offset,
            })
            .collect();
        Some((
            Self {
                dim,
                edges,
                slot,
                nvar,
            },
            total,
        ))
    }

    fn phase(&self, x: &DVector<f64>, level: usize) -> f64 {
        self.slot[level].map_or(0.0, |i| x[i])
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.edges
            .iter()
            .map(|e| e.weight * (self.phase(x, e.hi) - self.phase(x, e.lo) + e.offset).cos())
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.nvar);
        for e in &self.edges {
            let s = e.weight * (self.phase(x, e.hi) - self.phase(x, e.lo) + e.offset).sin();
            if let Some(i) = self.slot[e.hi] {
                g[i] -= s;
            }
            if let Some(i) = self.slot[e.lo] {
                g[i] += s;
            }
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.nvar, self.nvar);
        for e in &self.edges {
            let c = e.weight * (self.phase(x, e.hi) - self.phase(x, e.lo) + e.offset).cos();
            let (a, b) = (self.slot[e.hi], self.slot[e.lo]);
            if let Some(i) = a {
                h[(i, i)] -= c;
            }
            if let Some(j) = b {
                h[(j, j)] -= c;
            }
            if let (Some(i), Some(j)) = (a, b) {
                h[(i, j)] += c;
                h[(j, i)] += c;
            }
        }
        h
    }

    fn phases(&self, x: &DVector<f64>) -> PhaseVector {
        PhaseVector::new((1..self.dim).map(|l| self.phase(x, l)).collect())
    }
}

struct Ascent {
    x: DVector<f64>,
    value: f64,
    converged: bool,
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Newton ascent with the Hessian replaced by its absolute value, so the
/// step always points uphill and saddles repel.
fn ascend(obj: &Objective, mut x: DVector<f64>, opts: &SyncOptions) -> Ascent {
    let mut value = obj.value(&x);
    let mut kicked = false;
    for _ in 0..opts.max_iter {
        let g = obj.gradient(&x);
        let gmax = max_abs(&g);
        let eig = SymmetricEigen::new(-obj.hessian(&x));

        if gmax < opts.grad_tol {
            // Stationary: make sure it is not a saddle or a minimum.
            let (k, lowest) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
            if lowest < -1e-9 && !kicked {
                x += eig.eigenvectors.column(k) * 1e-3;
                value = obj.value(&x);
                kicked = true;
                continue;
            }
            return Ascent { x, value, converged: true };
        }
        kicked = false;

        let mut d = DVector::zeros(obj.nvar);
        for (i, lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            d += v * (v.dot(&g) / lam.abs().max(1e-8));
        }
        let dmax = max_abs(&d);
        if dmax > 1.0 {
            d /= dmax;
        }
        let mut slope = g.dot(&d);
        if slope <= 0.0 {
            d = g.clone();
            slope = g.dot(&g);
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + &d * step;
            let tv = obj.value(&trial);
            // Near the top the value change drops below rounding, so a smaller
            // gradient also counts as progress. Equality alone does not: flat
            // families of maxima would stall here.
            let progress = tv > value
                || (tv == value && max_abs(&obj.gradient(&trial)) < 0.5 * gmax);
            if progress && tv >= value + 1e-4 * step * slope {
                x = trial;
                value = tv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if gmax < 1e-8 {
                // Rounding floor of the objective reached.
                return Ascent { x, value, converged: true };
            }
            x += &g * (1e-3 / gmax);
            value = obj.value(&x);
        }
        x.apply(|v| *v = wrap_phase(*v));
    }
    let converged = max_abs(&obj.gradient(&x)) < opts.grad_tol;
    Ascent { x, value, converged }
}

fn diagonal_result() -> SyncResult {
    SyncResult {
        s_max: 0.0,
        s_max_scaled: 0.0,
        optimal_phase_sets: Vec::new(),
        branch: Branch::Diagonal,
        entrainment_contribution: 0.0,
    }
}

/// Global maximum of the phase distribution by multi-start local ascent.
///
/// Start `i` draws its initial point from the ChaCha8 stream `i` of
/// `opts.seed`, so results do not depend on thread scheduling.
pub fn maximize_sync(rho: &DensityMatrix, opts: &SyncOptions) -> Result<SyncResult> {
    if opts.starts == 0 {
        return Err(Error::Domain("starts must be at least 1".into()));
    }
    if !(opts.tol > 0.0 && opts.grad_tol > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    let d = rho.dim();
    let Some((obj, amplitude)) = Objective::new(rho) else {
        return Ok(diagonal_result());
    };

    let runs: Vec<Ascent> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let x0 = DVector::from_fn(obj.nvar, |_, _| rng.random::<f64>() * TAU);
            ascend(&obj, x0, opts)
        })
        .collect();

    let best = runs
        .iter()
        .fold(&runs[0], |a, b| if b.value > a.value { b } else { a });
    if best.value * amplitude < DEGENERATE_AMPLITUDE {
        return Ok(diagonal_result());
    }

    let make = |x: &DVector<f64>, sets: Vec<PhaseVector>| {
        let s_max = pair_sum(rho, &obj.phases(x));
        SyncResult {
            s_max,
            s_max_scaled: scale_factor(d) * s_max,
            optimal_phase_sets: sets,
            branch: Branch::NumericOnly,
            entrainment_contribution: entrainment_contribution(rho),
        }
    };

    let top = runs
        .iter()
        .filter(|r| r.converged)
        .fold(f64::NEG_INFINITY, |a, r| a.max(r.value));
    if top == f64::NEG_INFINITY {
        let sets = vec![obj.phases(&best.x)];
        return Err(Error::NotConverged {
            iterations: opts.max_iter,
            best: Box::new(make(&best.x, sets)),
        });
    }

    let mut reps: Vec<(&Ascent, PhaseVector)> = Vec::new();
    for r in runs.iter().filter(|r| r.converged && r.value >= top - 1e-10) {
        let ph = obj.phases(&r.x);
        match reps.iter_mut().find(|(_, p)| p.torus_distance(&ph) < 10.0 * opts.tol) {
            Some(slot) if r.value > slot.0.value => *slot = (r, ph),
            Some(_) => {}
            None => reps.push((r, ph)),
        }
    }
    let winner = reps
        .iter()
        .fold(reps[0].0, |a, (r, _)| if r.value > a.value { r } else { a });
    let sets = reps.iter().map(|(_, p)| p.clone()).collect();
    Ok(make(&winner.x, sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sync::{l1_bound, phase_distribution};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn random_state(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m / tr).unwrap()
    }

    #[test]
    fn diagonal_state_is_flagged() {
        let r = maximize_sync(&DensityMatrix::maximally_mixed(4), &SyncOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::Diagonal);
        assert_eq!(r.s_max, 0.0);
        assert!(r.optimal_phase_sets.is_empty());
    }

    #[test]
    fn zero_starts_rejected() {
        let opts = SyncOptions { starts: 0, ..Default::default() };
        assert!(maximize_sync(&DensityMatrix::maximally_mixed(3), &opts).is_err());
    }

    #[test]
    fn single_coherence_compensates_phase() {
        let mut m = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0 / 3.0, 0.0));
        m[(0, 1)] = Complex64::from_polar(0.1, 0.7);
        m[(1, 0)] = m[(0, 1)].conj();
        let rho = DensityMatrix::new(m).unwrap();
        let r = maximize_sync(&rho, &SyncOptions::default()).unwrap();
        assert!((r.s_max - 0.1 / (8.0 * PI)).abs() < 1e-15);
        assert_eq!(r.optimal_phase_sets.len(), 1);
        assert!((r.optimal_phase_sets[0].level(1) - (TAU - 0.7)).abs() < 1e-10);
    }

    #[test]
    fn matches_grid_search_d4() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_state(&mut rng, 4);
        let r = maximize_sync(&rho, &SyncOptions::default()).unwrap();
        let res = 200;
        let mut grid_best = f64::NEG_INFINITY;
        for a in 0..res {
            for b in 0..res {
                for c in 0..res {
                    let ph = [a, b, c].map(|k| TAU * k as f64 / res as f64);
                    grid_best = grid_best.max(pair_sum(&rho, &PhaseVector(ph.to_vec())));
                }
            }
        }
        assert!(r.s_max >= grid_best - 1e-15);
        assert!(r.s_max - grid_best < 1e-6, "{} vs {}", r.s_max, grid_best);
    }

    #[test]
    fn maximum_dominates_probes_and_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=6 {
            let rho = random_state(&mut rng, d);
            let r = maximize_sync(&rho, &SyncOptions::default()).unwrap();
            assert!(r.s_max <= l1_bound(&rho) + 1e-12);
            assert!(r.s_max > 0.0);
            for _ in 0..200 {
                let ph = PhaseVector::new((0..d - 1).map(|_| rng.random::<f64>() * TAU).collect());
                assert!(r.s_max >= phase_distribution(&rho, &ph).unwrap() - 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_state(&mut rng, 5);
        let opts = SyncOptions { seed: 99, ..Default::default() };
        let a = maximize_sync(&rho, &opts).unwrap();
        let b = maximize_sync(&rho, &opts).unwrap();
        assert_eq!(a, b);
    }
}
