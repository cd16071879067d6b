//! 2D finite-element spectral laboratory.
//!
//! Computes eigenvalues of the Lamé, Stokes, vector/scalar Laplace, buckling
//! and clamped-plate operators on flat domains, cross-checks them against
//! closed-form references, and fits heat-trace (partition function) asymptotic
//! expansions against the theoretical coefficient formulas.

pub mod assembly;
pub mod eigen;
pub mod elements;
pub mod geometry;
pub mod heat;
pub mod lab;
pub mod oracles;
pub mod pool;
pub mod sparse;
pub mod suite;
