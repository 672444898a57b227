//! Topological invariants of disordered tight-binding Hamiltonians in finite volume.
//!
//! The crate builds covariant lattice Hamiltonians with magnetic fields and disorder,
//! computes Fermi projections and smooth functional calculus, and evaluates bulk,
//! boundary and spectral-flow invariants together with their finite-size diagnostics.

pub mod error;
pub mod linalg;
pub mod model;
pub mod invariants;
pub mod spectral;
pub mod boundary;
pub mod flow;
pub mod harness;

pub use error::{Result, TopoError};
