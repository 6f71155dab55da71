//! Mean-field reference, MP2 amplitudes and LUCJ parameter construction.

mod amplitudes;
mod lucj;
mod mean_field;

pub use amplitudes::{external_amplitudes, mp2_doubles, write_amplitudes, Mp2Result, T2Amplitudes};
pub use lucj::{lucj_from_t2, ConnectivityMask, LucjLayer, LucjParameters};
pub use mean_field::{solve_mean_field, MeanFieldOptions, MeanFieldSolution};
