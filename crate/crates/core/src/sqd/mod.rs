//! Sample-driven subspace selection, projected Hamiltonians, Davidson and
//! the excitation-based subspace expansion.

mod davidson;
mod projection;
mod subspace;
mod sweep;

pub use davidson::{davidson_ground, DavidsonOptions, GroundStateResult};
pub use projection::{project_determinants, project_hamiltonian, ProjectedOperator};
pub use subspace::{build_subspace, filter_samples, SubspaceBasis};
pub use sweep::{energy_variance, extsqd_expand, solve_subspace, sqd_sweep, SweepPoint};
