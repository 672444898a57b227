//! Finite-volume realizations of covariant tight-binding Hamiltonians.

mod caz;
mod definition;
mod disorder;
mod field;
mod flux;
pub mod io;
mod lattice;
mod symmetry;
mod zoo;

pub use caz::{classify_caz, Admissible, CazClass};
pub use definition::{
    assemble_hops, build_hamiltonian, dual_translation, magnetic_translation, restrict_half_space,
    HamiltonianSample, Hopping, ModelDefinition,
};
pub(crate) use definition::fiber_op;
pub use disorder::{respects, DisorderFamily, DisorderKind, DisorderSpec};
pub use field::MagneticFieldSpec;
pub use flux::{full_flux_gauge, insert_flux};
pub use lattice::{Boundary, LatticeSpec};
pub use symmetry::{proportional, SymmetrySpec};
pub use zoo::{describe, majorana_basis, make_named_model, param, Params, MODEL_NAMES};
