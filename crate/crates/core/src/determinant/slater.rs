//! Slater–Condon rules for spin-resolved integrals.

use super::excitation::{double_sign, single_sign};
use super::{bits, low_bits, Determinant, Spin};
use crate::model::ElectronicIntegrals;

/// `⟨d|H|d⟩`.
pub fn diagonal_energy(d: &Determinant, ints: &ElectronicIntegrals) -> f64 {
    let mut e = ints.core_energy();
    for word in [d.alpha, d.beta] {
        for p in bits(word) {
            e += ints.h(p, p);
            for r in bits(word & !low_bits(p + 1)) {
                e += if ints.is_density_density() {
                    ints.coulomb_same(p, r)
                } else {
                    ints.g_same(p, p, r, r) - ints.g_same(p, r, r, p)
                };
            }
        }
    }
    for p in bits(d.alpha) {
        for r in bits(d.beta) {
            e += ints.coulomb_opposite(p, r);
        }
    }
    e
}

/// Single excitation `i → a` in `spin` applied to ket `d`, without its sign.
fn single_value(d: &Determinant, spin: Spin, i: usize, a: usize, ints: &ElectronicIntegrals) -> f64 {
    let mut v = ints.h(a, i);
    if ints.is_density_density() {
        return v;
    }
    let (same, other) = match spin {
        Spin::Alpha => (d.alpha, d.beta),
        Spin::Beta => (d.beta, d.alpha),
    };
    for r in bits(same) {
        v += ints.g_same(a, i, r, r) - ints.g_same(a, r, r, i);
    }
    for r in bits(other) {
        v += ints.g_opposite(a, i, r, r);
    }
    v
}

/// `⟨bra|H|ket⟩`.
pub fn matrix_element(bra: &Determinant, ket: &Determinant, ints: &ElectronicIntegrals) -> f64 {
    if bra == ket {
        return diagonal_energy(ket, ints);
    }
    let da = bra.alpha ^ ket.alpha;
    let db = bra.beta ^ ket.beta;
    if bra.alpha.count_ones() != ket.alpha.count_ones() || bra.beta.count_ones() != ket.beta.count_ones() {
        return 0.0;
    }
    let ra = da.count_ones() / 2;
    let rb = db.count_ones() / 2;
    match (ra, rb) {
        (1, 0) | (0, 1) => {
            let (spin, word, diff) = if ra == 1 {
                (Spin::Alpha, ket.alpha, da)
            } else {
                (Spin::Beta, ket.beta, db)
            };
            let i = (word & diff).trailing_zeros() as usize;
            let a = (!word & diff).trailing_zeros() as usize;
            single_sign(word, i, a) * single_value(ket, spin, i, a, ints)
        }
        _ if ints.is_density_density() => 0.0,
        (2, 0) | (0, 2) => {
            let (word, diff) = if ra == 2 { (ket.alpha, da) } else { (ket.beta, db) };
            let mut holes = bits(word & diff);
            let mut parts = bits(!word & diff);
            let (i, j) = (holes.next().unwrap(), holes.next().unwrap());
            let (a, b) = (parts.next().unwrap(), parts.next().unwrap());
            let sign = double_sign(word, i, j, a, b).unwrap_or(0.0);
            sign * (ints.g_same(a, i, b, j) - ints.g_same(a, j, b, i))
        }
        (1, 1) => {
            let i = (ket.alpha & da).trailing_zeros() as usize;
            let a = (!ket.alpha & da).trailing_zeros() as usize;
            let j = (ket.beta & db).trailing_zeros() as usize;
            let b = (!ket.beta & db).trailing_zeros() as usize;
            single_sign(ket.alpha, i, a) * single_sign(ket.beta, j, b) * ints.g_opposite(a, i, b, j)
        }
        _ => 0.0,
    }
}

/// Calls `f(d', ⟨d'|H|d⟩)` for every determinant `d' ≠ d` reachable by one
/// application of `H` with a nonzero element. Density-density integrals
/// connect through single hops only.
pub fn for_each_connection(
    d: &Determinant,
    ints: &ElectronicIntegrals,
    mut f: impl FnMut(Determinant, f64),
) {
    let m = ints.n_orbitals();
    let full = low_bits(m);
    for spin in [Spin::Alpha, Spin::Beta] {
        let word = d.string(spin);
        let empty = !word & full;
        for i in bits(word) {
            for a in bits(empty) {
                let v = single_sign(word, i, a) * single_value(d, spin, i, a, ints);
                if v != 0.0 {
                    f(d.with_string(spin, word ^ (1 << i) ^ (1 << a)), v);
                }
            }
        }
    }
    if ints.is_density_density() {
        return;
    }
    for spin in [Spin::Alpha, Spin::Beta] {
        let word = d.string(spin);
        let occ: Vec<usize> = bits(word).collect();
        let vir: Vec<usize> = bits(!word & full).collect();
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in vir.iter().enumerate() {
                    for &b in &vir[y + 1..] {
                        let g = ints.g_same(a, i, b, j) - ints.g_same(a, j, b, i);
                        if g == 0.0 {
                            continue;
                        }
                        let sign = double_sign(word, i, j, a, b).unwrap_or(0.0);
                        let w = word ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b);
                        f(d.with_string(spin, w), sign * g);
                    }
                }
            }
        }
    }
    let (ea, eb) = (!d.alpha & full, !d.beta & full);
    for i in bits(d.alpha) {
        for a in bits(ea) {
            let sa = single_sign(d.alpha, i, a);
            let na = d.alpha ^ (1 << i) ^ (1 << a);
            for j in bits(d.beta) {
                for b in bits(eb) {
                    let g = ints.g_opposite(a, i, b, j);
                    if g == 0.0 {
                        continue;
                    }
                    let v = sa * single_sign(d.beta, j, b) * g;
                    f(Determinant::new(na, d.beta ^ (1 << j) ^ (1 << b)), v);
                }
            }
        }
    }
}
