use super::{bits, low_bits, Determinant, Spin};
use crate::{Error, Result};

/// Mask of the orbitals strictly between `i` and `j`.
#[inline]
pub(crate) fn between_mask(i: usize, j: usize) -> u64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    low_bits(hi) & !low_bits(lo + 1)
}

#[inline]
fn parity(word: u64) -> f64 {
    if word.count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `a_p |word⟩`, with the sign from the occupied modes below `p`.
#[inline]
pub(crate) fn annihilate(word: u64, p: usize) -> Option<(u64, f64)> {
    let bit = 1u64 << p;
    (word & bit != 0).then(|| (word ^ bit, parity(word & (bit - 1))))
}

#[inline]
pub(crate) fn create(word: u64, p: usize) -> Option<(u64, f64)> {
    let bit = 1u64 << p;
    (word & bit == 0).then(|| (word | bit, parity(word & (bit - 1))))
}

/// Sign of `a†_a a_i |word⟩` for occupied `i` and empty `a`.
#[inline]
pub(crate) fn single_sign(word: u64, i: usize, a: usize) -> f64 {
    parity(word & between_mask(i, a))
}

/// Sign of `a†_a a†_b a_j a_i |word⟩`, applied right to left.
#[inline]
pub(crate) fn double_sign(word: u64, i: usize, j: usize, a: usize, b: usize) -> Option<f64> {
    let (w, s1) = annihilate(word, i)?;
    let (w, s2) = annihilate(w, j)?;
    let (w, s3) = create(w, b)?;
    let (_, s4) = create(w, a)?;
    Some(s1 * s2 * s3 * s4)
}

/// Spin-preserving excitation `a†_{c0} a†_{c1} … a_{a1} a_{a0}` within one
/// spin channel, together with its sign on the determinant it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Excitation {
    pub spin: Spin,
    pub annihilated: Vec<usize>,
    pub created: Vec<usize>,
    pub sign: f64,
}

impl Excitation {
    /// Excitation in `spin` that takes `from` to `to`; `None` when the strings
    /// of that spin coincide or differ in particle number.
    pub fn between(from: &Determinant, to: &Determinant, spin: Spin) -> Option<Self> {
        let (f, t) = (from.string(spin), to.string(spin));
        if f == t || f.count_ones() != t.count_ones() {
            return None;
        }
        let annihilated: Vec<usize> = bits(f & !t).collect();
        let created: Vec<usize> = bits(t & !f).collect();
        let mut ex = Excitation {
            spin,
            annihilated,
            created,
            sign: 1.0,
        };
        let (_, sign) = ex.apply(from)?;
        ex.sign = sign;
        Some(ex)
    }

    pub fn rank(&self) -> usize {
        self.annihilated.len()
    }

    /// Applies the operator with fermionic sign tracking.
    pub fn apply(&self, det: &Determinant) -> Option<(Determinant, f64)> {
        let mut word = det.string(self.spin);
        let mut sign = 1.0;
        for &p in &self.annihilated {
            let (w, s) = annihilate(word, p)?;
            word = w;
            sign *= s;
        }
        for &p in self.created.iter().rev() {
            let (w, s) = create(word, p)?;
            word = w;
            sign *= s;
        }
        Some((det.with_string(self.spin, word), sign))
    }

    /// Hermitian adjoint (the de-excitation).
    pub fn inverse(&self) -> Excitation {
        Excitation {
            spin: self.spin,
            annihilated: self.created.clone(),
            created: self.annihilated.clone(),
            sign: self.sign,
        }
    }
}

/// Which excitation ranks to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExcitationLevels {
    pub singles: bool,
    pub doubles: bool,
}

impl ExcitationLevels {
    pub const SINGLES: ExcitationLevels = ExcitationLevels {
        singles: true,
        doubles: false,
    };
    pub const SINGLES_DOUBLES: ExcitationLevels = ExcitationLevels {
        singles: true,
        doubles: true,
    };

    /// From a set of ranks drawn from `{1, 2}`.
    pub fn from_ranks(ranks: &[u8]) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidInput("excitation levels must be nonempty".into()));
        }
        let mut levels = ExcitationLevels {
            singles: false,
            doubles: false,
        };
        for &r in ranks {
            match r {
                1 => levels.singles = true,
                2 => levels.doubles = true,
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "excitation level {r} not in {{1, 2}}"
                    )))
                }
            }
        }
        Ok(levels)
    }

    pub fn ranks(&self) -> Vec<u8> {
        let mut out = Vec::new();
        if self.singles {
            out.push(1);
        }
        if self.doubles {
            out.push(2);
        }
        out
    }
}

fn string_singles(word: u64, m: usize) -> impl Iterator<Item = u64> {
    let empty = !word & low_bits(m);
    bits(word).flat_map(move |i| bits(empty).map(move |a| word ^ (1 << i) ^ (1 << a)))
}

fn string_doubles(word: u64, m: usize) -> Vec<u64> {
    let occ: Vec<usize> = bits(word).collect();
    let vir: Vec<usize> = bits(!word & low_bits(m)).collect();
    let mut out = Vec::new();
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in vir.iter().enumerate() {
                for &b in &vir[y + 1..] {
                    out.push(word ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b));
                }
            }
        }
    }
    out
}

/// All distinct spin-preserving excitations of `det` over `m` orbitals at the
/// requested ranks (doubles include αα, ββ and mixed αβ), canonically sorted.
pub fn generate_excitations(det: &Determinant, levels: ExcitationLevels, m: usize) -> Vec<Determinant> {
    let mut out = Vec::new();
    if levels.singles {
        out.extend(string_singles(det.alpha, m).map(|a| Determinant::new(a, det.beta)));
        out.extend(string_singles(det.beta, m).map(|b| Determinant::new(det.alpha, b)));
    }
    if levels.doubles {
        out.extend(string_doubles(det.alpha, m).into_iter().map(|a| Determinant::new(a, det.beta)));
        out.extend(string_doubles(det.beta, m).into_iter().map(|b| Determinant::new(det.alpha, b)));
        for a in string_singles(det.alpha, m) {
            out.extend(string_singles(det.beta, m).map(|b| Determinant::new(a, b)));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_singles() {
        let d = Determinant::from_orbitals(&[0], &[0]);
        let ex = generate_excitations(&d, ExcitationLevels::SINGLES, 2);
        assert_eq!(ex.len(), 2);
        assert!(ex.contains(&Determinant::from_orbitals(&[1], &[0])));
        assert!(ex.contains(&Determinant::from_orbitals(&[0], &[1])));
    }

    #[test]
    fn filled_channel_has_no_excitations() {
        let d = Determinant::from_orbitals(&[0, 1, 2], &[0]);
        let ex = generate_excitations(&d, ExcitationLevels::SINGLES_DOUBLES, 3);
        assert!(ex.iter().all(|e| e.alpha == d.alpha));
    }

    #[test]
    fn excitation_then_adjoint_restores_with_plus_sign() {
        let d = Determinant::from_orbitals(&[0, 2, 3], &[1]);
        let ex = Excitation {
            spin: Spin::Alpha,
            annihilated: vec![0, 3],
            created: vec![4, 1],
            sign: 1.0,
        };
        let (d2, s1) = ex.apply(&d).unwrap();
        let (d3, s2) = ex.inverse().apply(&d2).unwrap();
        assert_eq!(d3, d);
        assert_eq!(s1 * s2, 1.0);
    }

    #[test]
    fn between_recovers_sign() {
        let from = Determinant::from_orbitals(&[0, 1, 2], &[0]);
        let to = Determinant::from_orbitals(&[1, 2, 3], &[0]);
        let ex = Excitation::between(&from, &to, Spin::Alpha).unwrap();
        assert_eq!(ex.annihilated, vec![0]);
        assert_eq!(ex.created, vec![3]);
        // Moving orbital 0 past orbitals 1 and 2: even parity.
        assert_eq!(ex.sign, 1.0);
        assert_eq!(ex.sign, single_sign(from.alpha, 0, 3));
        assert!(Excitation::between(&from, &to, Spin::Beta).is_none());
    }

    #[test]
    fn levels_parse() {
        assert_eq!(ExcitationLevels::from_ranks(&[1]).unwrap(), ExcitationLevels::SINGLES);
        assert_eq!(
            ExcitationLevels::from_ranks(&[2, 1]).unwrap(),
            ExcitationLevels::SINGLES_DOUBLES
        );
        assert!(ExcitationLevels::from_ranks(&[]).is_err());
        assert!(ExcitationLevels::from_ranks(&[3]).is_err());
    }
}
