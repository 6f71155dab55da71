//! Ground-state energies and direct band gaps of extended-Hubbard lattice
//! Hamiltonians from sample-driven configuration-subspace diagonalization.
//!
//! The crate is organized along the pipeline:
//!
//! * [`model`]: lattice and electronic Hamiltonians, the lattice→electronic
//!   mapping, orbital rotations and FCIDUMP interchange.
//! * [`determinant`]: occupation-bitstring determinants, excitations and
//!   Slater–Condon matrix elements.
//! * [`reference`]: mean-field orbitals, MP2 amplitudes and LUCJ parameters.
//! * [`lucj_sim`]: exact sector statevector of the LUCJ ansatz and sampling.
//! * [`sqd`]: subspace construction, projection, Davidson, sweeps and the
//!   excitation-based subspace expansion.
//! * [`selci`]: full CI and heat-bath selected CI.
//! * [`workflow`]: the three-sector band-gap pipeline.

pub mod determinant;
pub mod error;
mod linalg;
pub mod lucj_sim;
pub mod model;
pub mod reference;
pub mod selci;
pub mod sqd;
pub mod workflow;

pub use error::{Error, ErrorCategory, Result};
