//! Numerical machinery for few-qubit master equations with local noise and
//! a stochastic reset channel: generator assembly, steady states,
//! generator spectra, and steady-state entanglement measured by the
//! negativity, together with closed-form two-qubit oracles the numerics
//! are pinned against.
//!
//! Layout:
//! - [`qstate`]: operators, density matrices, bipartitions, partial
//!   trace/transpose.
//! - [`models`]: Hamiltonians, noise and reset parameterizations, validated
//!   [`models::ModelConfig`] with a TOML wire format.
//! - [`liouvillian`]: the generator, matrix-free and dense, plus the
//!   complete-positivity check.
//! - [`solver`]: steady states (dense null space / long-time propagation),
//!   finite-time propagation, spectra.
//! - [`analytic`]: closed forms for the two-qubit Ising + dephasing + reset
//!   model.
//! - [`entanglement`]: negativity, bipartition averages, reduced pairs,
//!   Poisson mixtures.
//! - [`sweep`]: parameter grids, boundary extraction, figure curve sets.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod liouvillian;
pub mod models;
pub mod ode;
pub mod qstate;
pub mod random;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use models::ModelConfig;
pub use qstate::{Bipartition, DensityMatrix, Operator, C64};
