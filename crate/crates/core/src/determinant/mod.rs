//! Occupation-bitstring determinants.
//!
//! Orbital `i` maps to bit `i` of each spin word. In the Jordan–Wigner
//! ordering the alpha modes precede the beta modes; because every operator
//! used here conserves the particle number of each spin, the alpha/beta
//! cross sign cancels and only the intra-string parity remains.

mod excitation;
mod slater;

pub use excitation::{generate_excitations, Excitation, ExcitationLevels};
pub use slater::{diagonal_energy, for_each_connection, matrix_element};

use serde::{Deserialize, Serialize};

use crate::model::SectorSpec;
use crate::{Error, Result};

/// Default cap on enumerated sector sizes.
pub const DEFAULT_SECTOR_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Alpha,
    Beta,
}

/// One configuration: alpha and beta occupation words.
///
/// Field order fixes the canonical ordering: beta word major, alpha minor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Determinant {
    pub beta: u64,
    pub alpha: u64,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Determinant { alpha, beta }
    }

    /// Lowest `n_alpha` / `n_beta` orbitals filled.
    pub fn aufbau(n_alpha: usize, n_beta: usize) -> Self {
        Determinant::new(low_bits(n_alpha), low_bits(n_beta))
    }

    pub fn from_orbitals(alpha: &[usize], beta: &[usize]) -> Self {
        let word = |orbs: &[usize]| orbs.iter().fold(0u64, |w, &p| w | (1 << p));
        Determinant::new(word(alpha), word(beta))
    }

    #[inline]
    pub fn string(&self, spin: Spin) -> u64 {
        match spin {
            Spin::Alpha => self.alpha,
            Spin::Beta => self.beta,
        }
    }

    #[inline]
    pub fn with_string(self, spin: Spin, word: u64) -> Self {
        match spin {
            Spin::Alpha => Determinant::new(word, self.beta),
            Spin::Beta => Determinant::new(self.alpha, word),
        }
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    pub fn in_sector(&self, spec: &SectorSpec) -> bool {
        let mask = low_bits(spec.n_orbitals);
        self.alpha & !mask == 0
            && self.beta & !mask == 0
            && self.n_alpha() == spec.n_alpha
            && self.n_beta() == spec.n_beta
    }

    /// Measurement bitstring: beta word then alpha word, each written from
    /// orbital `M-1` down to orbital `0`.
    pub fn to_bitstring(&self, n_orbitals: usize) -> String {
        format!(
            "{}{}",
            word_to_bits(self.beta, n_orbitals),
            word_to_bits(self.alpha, n_orbitals)
        )
    }

    /// Inverse of [`Determinant::to_bitstring`].
    pub fn from_bitstring(bits: &str, n_orbitals: usize) -> Option<Self> {
        if bits.len() != 2 * n_orbitals || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        let (beta, alpha) = bits.split_at(n_orbitals);
        let parse = |s: &str| if s.is_empty() { Some(0) } else { u64::from_str_radix(s, 2).ok() };
        Some(Determinant::new(parse(alpha)?, parse(beta)?))
    }
}

fn word_to_bits(word: u64, n: usize) -> String {
    (0..n)
        .rev()
        .map(|i| if word >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[inline]
pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterator over the set bit positions of a word, ascending.
#[inline]
pub(crate) fn bits(mut word: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if word == 0 {
            None
        } else {
            let i = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(i)
        }
    })
}

/// Binomial coefficient; saturates instead of overflowing.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All `n`-electron strings over `m` orbitals in increasing numeric order.
pub fn enumerate_strings(m: usize, n: usize) -> Vec<u64> {
    if n > m {
        return Vec::new();
    }
    if n == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(m, n) as usize);
    let limit = low_bits(m);
    let mut w = low_bits(n);
    loop {
        out.push(w);
        // Gosper's hack: next word with the same popcount.
        let c = w & w.wrapping_neg();
        let r = w.wrapping_add(c);
        if r == 0 || r & !limit != 0 {
            break;
        }
        w = (((r ^ w) >> 2) / c) | r;
        if w & !limit != 0 {
            break;
        }
    }
    out
}

/// Every determinant of the sector, canonically ordered.
pub fn enumerate_sector(spec: &SectorSpec, cap: u128) -> Result<Vec<Determinant>> {
    let size = spec.dimension();
    if size > cap {
        return Err(Error::CapExceeded {
            what: "sector",
            size,
            cap,
        });
    }
    let alphas = enumerate_strings(spec.n_orbitals, spec.n_alpha);
    let betas = enumerate_strings(spec.n_orbitals, spec.n_beta);
    Ok(betas
        .iter()
        .flat_map(|&b| alphas.iter().map(move |&a| Determinant::new(a, b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes() {
        let dets = enumerate_sector(&SectorSpec::new(2, 1, 1).unwrap(), DEFAULT_SECTOR_CAP).unwrap();
        assert_eq!(dets.len(), 4);
        let vac = enumerate_sector(&SectorSpec::new(2, 0, 0).unwrap(), DEFAULT_SECTOR_CAP).unwrap();
        assert_eq!(vac, vec![Determinant::new(0, 0)]);
        let dets = enumerate_sector(&SectorSpec::new(4, 2, 2).unwrap(), DEFAULT_SECTOR_CAP).unwrap();
        assert_eq!(dets.len() as u128, binomial(4, 2).pow(2));
        assert_eq!(dets.len(), 36);
    }

    #[test]
    fn sector_is_canonical_and_unique() {
        let spec = SectorSpec::new(5, 2, 3).unwrap();
        let dets = enumerate_sector(&spec, DEFAULT_SECTOR_CAP).unwrap();
        assert!(dets.windows(2).all(|w| w[0] < w[1]));
        assert!(dets.iter().all(|d| d.in_sector(&spec)));
    }

    #[test]
    fn full_strings() {
        assert_eq!(enumerate_strings(3, 3), vec![0b111]);
        assert_eq!(enumerate_strings(64, 64), vec![u64::MAX]);
        assert_eq!(enumerate_strings(3, 4), Vec::<u64>::new());
        assert_eq!(enumerate_strings(4, 1), vec![1, 2, 4, 8]);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = SectorSpec::new(20, 10, 10).unwrap();
        assert!(matches!(
            enumerate_sector(&spec, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn bitstring_convention() {
        // "0110" with M=2: beta word 01, alpha word 10.
        let d = Determinant::from_bitstring("0110", 2).unwrap();
        assert_eq!(d.beta, 0b01);
        assert_eq!(d.alpha, 0b10);
        assert_eq!(d.to_bitstring(2), "0110");
        assert!(Determinant::from_bitstring("011", 2).is_none());
        assert!(Determinant::from_bitstring("01x0", 2).is_none());
    }

    #[test]
    fn canonical_order_is_beta_major() {
        let a = Determinant::new(0b10, 0b01);
        let b = Determinant::new(0b01, 0b10);
        assert!(a < b);
    }
}
