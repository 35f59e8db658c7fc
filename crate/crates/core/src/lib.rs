//! Steady states and phase synchronization of a driven thermal maser with
//! one ground level, one excited level and `N` degenerate upper levels.
//!
//! Pipeline: [`model::SystemParams`] → [`liouvillian::build_liouvillian`] →
//! [`steady_state::solve_numeric`] (or [`steady_state::solve_analytic`]) →
//! [`sync::maximize_sync`]. The [`experiments`] module runs the parameter
//! sweeps and the scaling study; [`cli`] wraps everything behind the
//! `maser-sync` binary.
//!
//! Runnable examples live in `examples/`:
//!
//! - `steady_state`: numeric vs analytic steady state
//! - `phase_grid`: the distribution over two relative phases
//! - `competition_n2`: closed form vs optimizer for two degenerate levels
//! - `bath_ratio_sweep`, `drive_ratio_sweep`: the two parameter sweeps
//! - `n_scaling`: power-law exponents versus `N`
//! - `asymptote`: the refrigerator maximum at large `N`
//! - `diagonality_d3`: witnesses for three-level states
//! - `husimi_marginal`: quadrature marginal vs closed form

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod liouvillian;
pub mod model;
pub mod steady_state;
pub mod sync;

pub use error::{Error, Result};
