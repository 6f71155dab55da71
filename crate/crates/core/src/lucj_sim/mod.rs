//! Exact LUCJ state construction over a fixed-particle sector, and seeded
//! bitstring sampling.

mod samples;
mod statevector;

pub use samples::{format_samples, load_samples, parse_samples, sample, write_samples, Provenance, SampleSet};
pub use statevector::{build_state, givens_decomposition, Givens, SectorStatevector, DEFAULT_STATE_CAP};
