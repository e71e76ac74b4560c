//! Lattice Boltzmann solver for geometrically and constitutively non-linear
//! elastodynamics in two dimensions.
//!
//! The scheme works in the reference configuration: the lattice never
//! deforms, the populations carry the moments `(r, j, Pi)` and the gap
//! between the lattice momentum flux and the hyperelastic stress enters
//! through a source term evaluated with finite differences.

pub mod acceptance;
pub mod boundary;
pub mod cli;
pub mod collision;
pub mod constitutive;
pub mod d2q9;
pub mod error;
pub mod fdops;
pub mod loading;
pub mod solver;
pub mod validation;

pub use error::{Error, Result};
