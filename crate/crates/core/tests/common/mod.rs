//! Independent second-quantized oracle over the full Fock space.
//!
//! Modes `0..M` are alpha orbitals, `M..2M` beta orbitals; Jordan–Wigner
//! signs count occupied modes below the target. Nothing here calls the
//! library's determinant code.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hsqd_core::determinant::Determinant;
use hsqd_core::model::{ElectronicIntegrals, LatticeHamiltonian, Tensor4};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Fock = BTreeMap<u64, f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn parity_below(state: u64, mode: usize) -> f64 {
    if (state & ((1u64 << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn annihilate(state: u64, mode: usize) -> Option<(u64, f64)> {
    (state >> mode & 1 == 1).then(|| (state ^ (1 << mode), parity_below(state, mode)))
}

pub fn create(state: u64, mode: usize) -> Option<(u64, f64)> {
    (state >> mode & 1 == 0).then(|| (state | (1 << mode), parity_below(state, mode)))
}

/// Applies `a†_{ops[0]} ... a_{ops[k]}` given as (mode, is_creation), rightmost first.
pub fn apply_string(state: u64, ops: &[(usize, bool)]) -> Option<(u64, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(mode, dag) in ops.iter().rev() {
        let (next, f) = if dag { create(s, mode)? } else { annihilate(s, mode)? };
        s = next;
        sign *= f;
    }
    Some((s, sign))
}

pub fn fock_state(d: &Determinant, m: usize) -> u64 {
    d.alpha | (d.beta << m)
}

pub fn fock_to_det(state: u64, m: usize) -> Determinant {
    let mask = (1u64 << m) - 1;
    Determinant::new(state & mask, state >> m)
}

fn mode(p: usize, spin: usize, m: usize) -> usize {
    p + spin * m
}

/// `H|state⟩` for the lattice Hamiltonian written directly:
/// `Σ t_pq a†_pσ a_qσ + Σ U_p n_p↑ n_p↓ + Σ_{p≠q,στ} V_pq n_pσ n_qτ`.
pub fn apply_lattice(lat: &LatticeHamiltonian, state: u64) -> Fock {
    let m = lat.n_orbitals();
    let mut out = Fock::new();
    let occ = |s: u64, p: usize, spin: usize| (s >> mode(p, spin, m) & 1) as f64;
    for spin in 0..2 {
        for p in 0..m {
            for q in 0..m {
                let t = lat.hopping()[(p, q)].re;
                if t == 0.0 {
                    continue;
                }
                if let Some((s, sign)) = apply_string(state, &[(mode(p, spin, m), true), (mode(q, spin, m), false)]) {
                    *out.entry(s).or_default() += t * sign;
                }
            }
        }
    }
    let mut diag = 0.0;
    for p in 0..m {
        diag += lat.u_intra()[p] * occ(state, p, 0) * occ(state, p, 1);
        for q in 0..m {
            if p == q {
                continue;
            }
            let np = occ(state, p, 0) + occ(state, p, 1);
            let nq = occ(state, q, 0) + occ(state, q, 1);
            diag += lat.v_inter()[(p, q)] * np * nq;
        }
    }
    *out.entry(state).or_default() += diag;
    out
}

/// `H|state⟩` for `Σ h_pq a†_pσ a_qσ + ½ Σ g^{στ}_pqrs a†_pσ a†_rτ a_sτ a_qσ + core`.
pub fn apply_electronic(ints: &ElectronicIntegrals, state: u64) -> Fock {
    let m = ints.n_orbitals();
    let mut out = Fock::new();
    *out.entry(state).or_default() += ints.core_energy();
    for spin in 0..2 {
        for p in 0..m {
            for q in 0..m {
                let h = ints.one_body()[(p, q)];
                if h == 0.0 {
                    continue;
                }
                if let Some((s, sign)) = apply_string(state, &[(mode(p, spin, m), true), (mode(q, spin, m), false)]) {
                    *out.entry(s).or_default() += h * sign;
                }
            }
        }
    }
    for sigma in 0..2 {
        for tau in 0..2 {
            let g: &Tensor4 = if sigma == tau { ints.same_spin() } else { ints.opposite_spin() };
            for p in 0..m {
                for q in 0..m {
                    for r in 0..m {
                        for s_ in 0..m {
                            let v = g.get(p, q, r, s_);
                            if v == 0.0 {
                                continue;
                            }
                            let ops = [
                                (mode(p, sigma, m), true),
                                (mode(r, tau, m), true),
                                (mode(s_, tau, m), false),
                                (mode(q, sigma, m), false),
                            ];
                            if let Some((s, sign)) = apply_string(state, &ops) {
                                *out.entry(s).or_default() += 0.5 * v * sign;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Sector determinants by brute force over all `2^M × 2^M` occupations.
pub fn sector_dets(m: usize, na: usize, nb: usize) -> Vec<Determinant> {
    let mut v = Vec::new();
    for b in 0u64..1 << m {
        for a in 0u64..1 << m {
            if a.count_ones() as usize == na && b.count_ones() as usize == nb {
                v.push(Determinant::new(a, b));
            }
        }
    }
    v
}

pub fn dense(dets: &[Determinant], m: usize, apply: impl Fn(u64) -> Fock) -> DMatrix<f64> {
    let index: BTreeMap<u64, usize> = dets.iter().enumerate().map(|(k, d)| (fock_state(d, m), k)).collect();
    let mut h = DMatrix::zeros(dets.len(), dets.len());
    for (j, d) in dets.iter().enumerate() {
        for (s, v) in apply(fock_state(d, m)) {
            if let Some(&i) = index.get(&s) {
                h[(i, j)] += v;
            }
        }
    }
    h
}

pub fn lowest(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn ground_energy_lattice(lat: &LatticeHamiltonian, na: usize, nb: usize) -> f64 {
    let m = lat.n_orbitals();
    lowest(&dense(&sector_dets(m, na, nb), m, |s| apply_lattice(lat, s)))
}

pub fn ground_energy_electronic(ints: &ElectronicIntegrals, na: usize, nb: usize) -> f64 {
    let m = ints.n_orbitals();
    lowest(&dense(&sector_dets(m, na, nb), m, |s| apply_electronic(ints, s)))
}

/// Random real lattice with symmetric hopping, nonnegative U and symmetric V.
pub fn random_lattice(rng: &mut impl Rng, m: usize) -> LatticeHamiltonian {
    let mut t = DMatrix::zeros(m, m);
    let mut v = DMatrix::zeros(m, m);
    for p in 0..m {
        t[(p, p)] = rng.random_range(-1.0..1.0);
        for q in p + 1..m {
            let x = rng.random_range(-1.5..1.5);
            t[(p, q)] = x;
            t[(q, p)] = x;
            let w = rng.random_range(0.0..1.0);
            v[(p, q)] = w;
            v[(q, p)] = w;
        }
    }
    let u = (0..m).map(|_| rng.random_range(0.0..5.0)).collect();
    LatticeHamiltonian::from_real(t, u, v).unwrap()
}

/// Random orthogonal matrix from a QR factorization.
pub fn random_orthogonal(rng: &mut impl Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}
