//! Path-integral propagator series evaluated along classical paths, with the
//! Madelung (quantum-fluid) decomposition and Bohmian trajectories built on
//! top, plus independent grid-Hamiltonian reference solvers.
// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values;
// index loops mirror the stencils they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical;
pub mod error;
pub mod evolve;
pub mod jet;
pub mod kernel;
pub mod madelung;
pub mod oracle;
pub mod parallel;
pub mod potential;
pub mod quadrature;
pub mod trajectories;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use parallel::Execution;
