//! Hamiltonian data types and their interchange formats.
//!
//! A [`LatticeHamiltonian`] holds the extended-Hubbard parameters (hopping
//! `t_pq`, on-site `U_p`, inter-site `V_pq`) at one labeled k-point. The
//! mapping in [`map_to_electronic`] rewrites it as spin-resolved one- and
//! two-body integrals ([`ElectronicIntegrals`]) so that determinant-based
//! solvers can treat lattice and molecular Hamiltonians alike.

mod fcidump;
mod integrals;
mod lattice;
mod sector;

pub use fcidump::{format_fcidump, parse_fcidump, read_fcidump, write_fcidump, FcidumpHeader};
pub use integrals::{
    electronic_to_lattice, map_to_electronic, rotate_basis, ElectronicIntegrals, OnSiteConvention,
    Tensor4,
};
pub use lattice::{
    load_lattice, parse_lattice, save_lattice, EnergyUnit, LatticeHamiltonian, HARTREE_TO_EV,
};
pub use sector::SectorSpec;

/// Absolute tolerance for Hermiticity and symmetry checks on inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;
