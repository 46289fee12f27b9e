//! Solvers for convex variational problems on the unit square.
//!
//! The central method evolves a damped nonlinear wave equation
//! `u_tt + a u_t = -∇E[u]` to steady state with an explicit finite difference
//! scheme ("PDE acceleration"). Obstacle constraints are enforced by
//! projection after every step. For comparison the crate also ships a
//! primal-dual method (with a bisection solver for the pointwise dual
//! update) and plain explicit gradient descent.
//!
//! Modules:
//! - [`grid`]: node-centered fields and the adjoint difference kernels
//! - [`models`]: discrete energies, their gradients, and the obstacle catalog
//! - [`solvers`]: the three iterative methods and their stopping rules
//! - [`analysis`]: rate bounds, decay/complexity fits and energy audits

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod grid;
pub mod models;
pub mod solvers;

pub use grid::{GridError, ScalarField, VectorField};
pub use models::{EnergyModel, ModelError, ProblemSpec};
pub use solvers::{SolveTrace, SolverConfig, SolverError, StoppingRule};
