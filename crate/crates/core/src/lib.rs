//! Space-time hybridizable discontinuous Galerkin (HDG) discretization of
//! time-dependent advection-diffusion in one spatial dimension, solved
//! all-at-once or slab-by-slab with BiCGSTAB preconditioned by approximate
//! ideal restriction (AIR) algebraic multigrid.
//!
//! The crate is organized bottom-up:
//!
//! - [`la`]: CSR matrices, block-diagonal scaling, dense LU, Matrix Market IO.
//! - [`mesh`]: simplicial space-time meshes, deformation, newest-vertex bisection.
//! - [`hdg`]: quadrature, bases, block assembly, static condensation, error norms.
//! - [`air`]: strength graphs, CF-splitting, lAIR restriction, relaxation, V-cycles.
//! - [`krylov`]: left-preconditioned BiCGSTAB.
//! - [`amr`]: Zienkiewicz-Zhu estimation, marking, and the adaptive loop.
//! - [`cases`]: built-in test problems.
//! - [`solver`]: the assemble, condense, precondition, solve, reconstruct pipeline.
//! - [`experiments`]: configuration and the batch experiment driver.

pub mod air;
pub mod amr;
pub mod cases;
pub mod error;
pub mod experiments;
pub mod hdg;
pub mod krylov;
pub mod la;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};

/// Number of spatial dimensions.
pub const SPACE_DIM: usize = 1;
/// Number of space-time dimensions (time first).
pub const ST_DIM: usize = SPACE_DIM + 1;

/// A space-time point `(t, x)`.
pub type Point = [f64; ST_DIM];
