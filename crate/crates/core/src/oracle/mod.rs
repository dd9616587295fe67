//! Reference solvers independent of the path-integral series: closed-form
//! Gaussians, a grid Hamiltonian with its spectrum, Crank–Nicolson stepping,
//! and brute-force lattice moments.

pub mod crank_nicolson;
mod gaussian;
pub mod hamiltonian;
pub mod lattice_brute;

pub use crank_nicolson::{crank_nicolson_evolve, CrankNicolson};
pub use gaussian::{AnalyticGaussian, GaussianSnapshot};
pub use hamiltonian::{exact_propagator_column, GridHamiltonian, SpectralDecomposition};
pub use lattice_brute::lattice_term_brute_force;
