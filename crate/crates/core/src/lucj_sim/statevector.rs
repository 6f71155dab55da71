use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::determinant::{bits, enumerate_strings, Determinant};
use crate::model::SectorSpec;
use crate::reference::LucjParameters;
use crate::{Error, Result};

/// Largest sector the statevector simulator will allocate.
pub const DEFAULT_STATE_CAP: u128 = 1_000_000;

/// Complex amplitudes over the canonical determinant basis of one sector.
/// Index `ib * n_alpha_strings + ia` holds `(alpha_strings[ia], beta_strings[ib])`.
#[derive(Clone, Debug)]
pub struct SectorStatevector {
    spec: SectorSpec,
    alpha_strings: Vec<u64>,
    beta_strings: Vec<u64>,
    amplitudes: Vec<Complex64>,
}

/// Rotation `[[c, s], [-s, c]]` acting on rows `(i, j)` of a matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

/// Factors a real orthogonal `u` as `G_1ᵀ G_2ᵀ … G_nᵀ diag(d)` with adjacent-row
/// rotations `G_k` and `d` entries of ±1.
pub fn givens_decomposition(u: &DMatrix<f64>) -> (Vec<Givens>, Vec<f64>) {
    let n = u.nrows();
    let mut a = u.clone();
    let mut out = Vec::new();
    for col in 0..n {
        for r in (col + 1..n).rev() {
            let (x, y) = (a[(r - 1, col)], a[(r, col)]);
            if y == 0.0 {
                continue;
            }
            let rho = x.hypot(y);
            let (c, s) = (x / rho, y / rho);
            for k in 0..n {
                let (p, q) = (a[(r - 1, k)], a[(r, k)]);
                a[(r - 1, k)] = c * p + s * q;
                a[(r, k)] = -s * p + c * q;
            }
            out.push(Givens { i: r - 1, j: r, c, s });
        }
    }
    let d = (0..n).map(|k| if a[(k, k)] < 0.0 { -1.0 } else { 1.0 }).collect();
    (out, d)
}

fn check_orthogonal(u: &DMatrix<f64>, n: usize) -> Result<()> {
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::InvalidInput(format!("orbital rotation must be {n}x{n}")));
    }
    let err = (u.transpose() * u - DMatrix::<f64>::identity(n, n)).amax();
    if err > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "orbital rotation is not orthogonal (deviation {err:.2e})"
        )));
    }
    Ok(())
}

/// Index pairs `(x, y)` of strings related by moving one electron from `i`
/// (occupied in `x`) to the empty `j`.
fn hop_pairs(strings: &[u64], i: usize, j: usize) -> Vec<(usize, usize)> {
    let (bi, bj) = (1u64 << i, 1u64 << j);
    strings
        .iter()
        .enumerate()
        .filter(|(_, &w)| w & bi != 0 && w & bj == 0)
        .map(|(x, &w)| {
            let y = strings.binary_search(&(w ^ bi ^ bj)).expect("string set closed under hops");
            (x, y)
        })
        .collect()
}

fn rotate_pair(a: &mut Complex64, b: &mut Complex64, c: f64, s: f64) {
    let (x, y) = (*a, *b);
    *a = x * c - y * s;
    *b = x * s + y * c;
}

impl SectorStatevector {
    /// Unit amplitude on `det`.
    pub fn basis_state(spec: SectorSpec, det: &Determinant, cap: u128) -> Result<Self> {
        let size = spec.dimension();
        if size > cap {
            return Err(Error::CapExceeded {
                what: "statevector sector",
                size,
                cap,
            });
        }
        if !det.in_sector(&spec) {
            return Err(Error::InvalidInput(format!(
                "reference {} is not in sector {spec}",
                det.to_bitstring(spec.n_orbitals)
            )));
        }
        let alpha_strings = enumerate_strings(spec.n_orbitals, spec.n_alpha);
        let beta_strings = enumerate_strings(spec.n_orbitals, spec.n_beta);
        let mut state = SectorStatevector {
            spec,
            amplitudes: vec![Complex64::new(0.0, 0.0); alpha_strings.len() * beta_strings.len()],
            alpha_strings,
            beta_strings,
        };
        let k = state.index_of(det).expect("checked sector membership");
        state.amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn spec(&self) -> SectorSpec {
        self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn determinant(&self, k: usize) -> Determinant {
        let na = self.alpha_strings.len();
        Determinant::new(self.alpha_strings[k % na], self.beta_strings[k / na])
    }

    pub fn index_of(&self, det: &Determinant) -> Option<usize> {
        let ia = self.alpha_strings.binary_search(&det.alpha).ok()?;
        let ib = self.beta_strings.binary_search(&det.beta).ok()?;
        Some(ib * self.alpha_strings.len() + ia)
    }

    pub fn amplitude(&self, det: &Determinant) -> Complex64 {
        self.index_of(det)
            .map_or(Complex64::new(0.0, 0.0), |k| self.amplitudes[k])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies the one-body rotation `a†_p → Σ_q u[q][p] a†_q` to both spin
    /// channels.
    pub fn apply_orbital_rotation(&mut self, u: &DMatrix<f64>) -> Result<()> {
        check_orthogonal(u, self.spec.n_orbitals)?;
        let (rotations, d) = givens_decomposition(u);
        let flipped: u64 = d
            .iter()
            .enumerate()
            .filter(|(_, &x)| x < 0.0)
            .fold(0, |acc, (p, _)| acc | 1 << p);
        let na = self.alpha_strings.len();
        let odd = |w: u64| (w & flipped).count_ones() & 1 == 1;
        let alpha_odd: Vec<bool> = self.alpha_strings.iter().map(|&w| odd(w)).collect();
        let beta_odd: Vec<bool> = self.beta_strings.iter().map(|&w| odd(w)).collect();
        self.amplitudes
            .par_chunks_mut(na)
            .zip(beta_odd.par_iter())
            .for_each(|(row, &bo)| {
                for (amp, &ao) in row.iter_mut().zip(&alpha_odd) {
                    if ao != bo {
                        *amp = -*amp;
                    }
                }
            });

        for g in rotations.iter().rev() {
            let pairs = hop_pairs(&self.alpha_strings, g.i, g.j);
            if !pairs.is_empty() {
                self.amplitudes.par_chunks_mut(na).for_each(|row| {
                    for &(x, y) in &pairs {
                        let (mut a, mut b) = (row[x], row[y]);
                        rotate_pair(&mut a, &mut b, g.c, g.s);
                        row[x] = a;
                        row[y] = b;
                    }
                });
            }
            for (x, y) in hop_pairs(&self.beta_strings, g.i, g.j) {
                for ia in 0..na {
                    let (kx, ky) = (x * na + ia, y * na + ia);
                    let (mut a, mut b) = (self.amplitudes[kx], self.amplitudes[ky]);
                    rotate_pair(&mut a, &mut b, g.c, g.s);
                    self.amplitudes[kx] = a;
                    self.amplitudes[ky] = b;
                }
            }
        }
        Ok(())
    }

    /// Multiplies each determinant by `exp(iφ)`, with
    /// `φ = Σ_pq J_same[p][q] (n_pα n_qα + n_pβ n_qβ) + J_opp[p][q] (n_pα n_qβ + n_pβ n_qα)`.
    pub fn apply_diagonal_phase(&mut self, j_same: &DMatrix<f64>, j_opposite: &DMatrix<f64>) {
        let same = |w: u64| -> f64 {
            bits(w).map(|p| bits(w).map(|q| j_same[(p, q)]).sum::<f64>()).sum()
        };
        let alpha_phase: Vec<f64> = self.alpha_strings.iter().map(|&w| same(w)).collect();
        let na = self.alpha_strings.len();
        let alpha_strings = &self.alpha_strings;
        self.amplitudes
            .par_chunks_mut(na)
            .zip(self.beta_strings.par_iter())
            .for_each(|(row, &wb)| {
                let pb = same(wb);
                for ((amp, &wa), &pa) in row.iter_mut().zip(alpha_strings).zip(&alpha_phase) {
                    let cross: f64 = bits(wa).map(|p| bits(wb).map(|q| j_opposite[(p, q)]).sum::<f64>()).sum();
                    let phi = pa + pb + 2.0 * cross;
                    *amp *= Complex64::from_polar(1.0, phi);
                }
            });
    }
}

/// The LUCJ state `Π_μ e^{K_μ} e^{iJ_μ} e^{-K_μ} |reference⟩` with layer 1
/// leftmost.
pub fn build_state(
    params: &LucjParameters,
    reference: &Determinant,
    spec: SectorSpec,
    cap: u128,
) -> Result<SectorStatevector> {
    if params.n_orbitals != spec.n_orbitals {
        return Err(Error::InvalidInput(format!(
            "parameters cover {} orbitals, sector has {}",
            params.n_orbitals, spec.n_orbitals
        )));
    }
    params.validate()?;
    let mut state = SectorStatevector::basis_state(spec, reference, cap)?;
    for layer in params.layers.iter().rev() {
        if layer.k.amax() == 0.0 {
            state.apply_diagonal_phase(&layer.j_same, &layer.j_opposite);
            continue;
        }
        let u = layer.k.clone().exp();
        state.apply_orbital_rotation(&u.transpose())?;
        state.apply_diagonal_phase(&layer.j_same, &layer.j_opposite);
        state.apply_orbital_rotation(&u)?;
    }
    Ok(state)
}
