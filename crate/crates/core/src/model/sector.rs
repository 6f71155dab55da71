use serde::{Deserialize, Serialize};

use crate::determinant::binomial;
use crate::{Error, Result};

/// Fixed particle-number sector: `n_alpha` spin-up and `n_beta` spin-down
/// electrons in `n_orbitals` spatial orbitals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub n_orbitals: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl SectorSpec {
    pub fn new(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_orbitals == 0 || n_orbitals > 64 {
            return Err(Error::InvalidInput(format!(
                "n_orbitals must lie in 1..=64, got {n_orbitals}"
            )));
        }
        if n_alpha > n_orbitals || n_beta > n_orbitals {
            return Err(Error::InvalidInput(format!(
                "sector ({n_alpha}, {n_beta}) does not fit in {n_orbitals} orbitals"
            )));
        }
        Ok(SectorSpec {
            n_orbitals,
            n_alpha,
            n_beta,
        })
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn alpha_dim(&self) -> u128 {
        binomial(self.n_orbitals, self.n_alpha)
    }

    pub fn beta_dim(&self) -> u128 {
        binomial(self.n_orbitals, self.n_beta)
    }

    /// Number of determinants in the sector.
    pub fn dimension(&self) -> u128 {
        self.alpha_dim() * self.beta_dim()
    }

    pub fn is_closed_shell(&self) -> bool {
        self.n_alpha == self.n_beta
    }
}

impl std::fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "M={} (n_alpha={}, n_beta={})",
            self.n_orbitals, self.n_alpha, self.n_beta
        )
    }
}
