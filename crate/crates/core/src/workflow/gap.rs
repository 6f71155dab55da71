use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{LatticeHamiltonian, SectorSpec};
use crate::{Error, Result};

/// The three particle-number sectors around `N_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Minus,
    Neutral,
    Plus,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::Minus, Sector::Neutral, Sector::Plus];

    pub fn label(self) -> &'static str {
        match self {
            Sector::Minus => "minus",
            Sector::Neutral => "neutral",
            Sector::Plus => "plus",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(Sector::Minus),
            "neutral" => Ok(Sector::Neutral),
            "plus" => Ok(Sector::Plus),
            _ => Err(Error::InvalidInput(format!("unknown sector label {s:?}"))),
        }
    }
}

/// `(n_alpha, n_beta)` for the `N_e − 1`, `N_e`, `N_e + 1` sectors.
///
/// The neutral sector is balanced, with the odd electron in alpha. For even
/// `N_e` the charged sectors remove or add an alpha electron. For odd `N_e`
/// the alpha electron is removed and a beta electron added, so every sector
/// keeps the smallest `|S_z|`. `spin_flip` swaps the roles of the channels
/// in the charged sectors.
pub fn sector_specs(n_orbitals: usize, n_electrons: usize, spin_flip: bool) -> Result<[SectorSpec; 3]> {
    if n_electrons == 0 || n_electrons >= 2 * n_orbitals {
        return Err(Error::InvalidInput(format!(
            "N_e = {n_electrons} leaves no room for both N_e - 1 and N_e + 1 in {n_orbitals} orbitals"
        )));
    }
    let na = n_electrons.div_ceil(2);
    let nb = n_electrons / 2;
    let (minus, plus) = if n_electrons % 2 == 0 { ((-1, 0), (1, 0)) } else { ((-1, 0), (0, 1)) };
    let make = |(da, db): (isize, isize)| -> Result<SectorSpec> {
        let (da, db) = if spin_flip { (db, da) } else { (da, db) };
        let (a, b) = (na as isize + da, nb as isize + db);
        if a < 0 || b < 0 || a as usize > n_orbitals || b as usize > n_orbitals {
            return Err(Error::InvalidInput(format!(
                "sector ({a}, {b}) does not fit in {n_orbitals} orbitals"
            )));
        }
        SectorSpec::new(n_orbitals, a as usize, b as usize)
    };
    Ok([
        make(minus)?,
        SectorSpec::new(n_orbitals, na, nb)?,
        make(plus)?,
    ])
}

/// `E[N−1] + E[N+1] − 2E[N]`.
pub fn compute_gap(e_minus: f64, e_neutral: f64, e_plus: f64) -> f64 {
    e_minus + e_plus - 2.0 * e_neutral
}

/// HOMO–LUMO gap of the hopping matrix with `n_occ` filled spatial orbitals.
pub fn single_particle_gap(lat: &LatticeHamiltonian, n_occ: usize) -> Result<f64> {
    let m = lat.n_orbitals();
    if n_occ == 0 || n_occ >= m {
        return Err(Error::InvalidInput(format!("n_occ = {n_occ} must lie in 1..{m}")));
    }
    let mut eps: Vec<f64> = lat.hopping().symmetric_eigenvalues().iter().copied().collect();
    eps.sort_by(f64::total_cmp);
    Ok(eps[n_occ] - eps[n_occ - 1])
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    #[test]
    fn even_sectors_differ_in_alpha() {
        let [m, n, p] = sector_specs(4, 4, false).unwrap();
        assert_eq!((m.n_alpha, m.n_beta), (1, 2));
        assert_eq!((n.n_alpha, n.n_beta), (2, 2));
        assert_eq!((p.n_alpha, p.n_beta), (3, 2));
        let [m, _, p] = sector_specs(4, 4, true).unwrap();
        assert_eq!((m.n_alpha, m.n_beta), (2, 1));
        assert_eq!((p.n_alpha, p.n_beta), (2, 3));
    }

    #[test]
    fn odd_sectors_stay_low_spin() {
        let [m, n, p] = sector_specs(4, 3, false).unwrap();
        assert_eq!((m.n_alpha, m.n_beta), (1, 1));
        assert_eq!((n.n_alpha, n.n_beta), (2, 1));
        assert_eq!((p.n_alpha, p.n_beta), (2, 2));
        assert!(sector_specs(2, 4, false).is_err());
        assert!(sector_specs(2, 0, false).is_err());
    }

    #[test]
    fn gap_formula() {
        assert_eq!(compute_gap(0.0, 0.0, 0.0), 0.0);
        assert!((compute_gap(-1.0, 2.0 - 8f64.sqrt(), 3.0) - 3.656854).abs() < 1e-6);
        assert_eq!(compute_gap(1.5, 2.5, 7.0), compute_gap(11.5, 12.5, 17.0));
    }

    #[test]
    fn hopping_gaps() {
        let diag = LatticeHamiltonian::from_real(
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]),
            vec![0.0; 2],
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!((single_particle_gap(&diag, 1).unwrap() - 2.0).abs() < 1e-12);
        let dimer = LatticeHamiltonian::chain(2, -1.0, 0.0, 0.0).unwrap();
        assert!((single_particle_gap(&dimer, 1).unwrap() - 2.0).abs() < 1e-12);
        let flat = LatticeHamiltonian::from_real(DMatrix::zeros(3, 3), vec![0.0; 3], DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(single_particle_gap(&flat, 1).unwrap(), 0.0);
    }
}
