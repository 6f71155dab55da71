use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{LatticeHamiltonian, SYMMETRY_TOL};
use crate::{Error, Result};

/// Dense real four-index tensor `g[p][q][r][s]` in chemists' order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor4::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        t.data[((p * n + q) * n + r) * n + s] = f(p, q, r, s);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.offset(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let k = self.offset(p, q, r, s);
        self.data[k] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|x| **x != 0.0).count()
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Contracts one index with `c`: `out[.., p', ..] = Σ_a c[a][p'] in[.., a, ..]`,
    /// rotating the slot `slot` (0..4).
    fn transform_slot(&self, c: &DMatrix<f64>, slot: usize) -> Tensor4 {
        let n = self.n;
        let mut out = Tensor4::zeros(n);
        let strides = [n * n * n, n * n, n, 1];
        let stride = strides[slot];
        for base in 0..self.data.len() {
            // Visit each fiber once, from its first element.
            if (base / stride) % n != 0 {
                continue;
            }
            for pn in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    let w = c[(a, pn)];
                    if w != 0.0 {
                        acc += w * self.data[base + a * stride];
                    }
                }
                out.data[base + pn * stride] = acc;
            }
        }
        out
    }
}

/// How the on-site interaction is stored in the opposite-spin channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OnSiteConvention {
    /// Reconstructed operator equals `U_p n_p↑ n_p↓` exactly.
    #[default]
    Hamiltonian,
    /// Stores `2 U_p`, reproducing the published coefficient table literally
    /// (the reconstructed operator then carries `2 U_p n_p↑ n_p↓`).
    Literal2U,
}

impl OnSiteConvention {
    fn factor(self) -> f64 {
        match self {
            OnSiteConvention::Hamiltonian => 1.0,
            OnSiteConvention::Literal2U => 2.0,
        }
    }
}

/// Spin-resolved electronic Hamiltonian
///
/// `H = E_core + Σ_{pq,σ} h_pq a†_pσ a_qσ
///      + ½ Σ_{pqrs,σ} g^ss_pqrs a†_pσ a†_rσ a_sσ a_qσ
///      + ½ Σ_{pqrs,σ≠τ} g^os_pqrs a†_pσ a†_rτ a_sτ a_qσ`.
///
/// Both channels obey `g_pqrs = g_qpsr = g_rspq`. Same-spin entries with
/// `p == r` or `q == s` multiply an identically vanishing operator and are
/// kept at zero, so equal operators compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectronicIntegrals {
    n_orbitals: usize,
    one_body: DMatrix<f64>,
    same_spin: Tensor4,
    opposite_spin: Tensor4,
    core_energy: f64,
    density_density: bool,
    // Coulomb-like diagonals g_pprr, cached for the density-density fast path.
    coulomb_same: DMatrix<f64>,
    coulomb_opposite: DMatrix<f64>,
}

impl ElectronicIntegrals {
    pub fn new(
        one_body: DMatrix<f64>,
        same_spin: Tensor4,
        opposite_spin: Tensor4,
        core_energy: f64,
    ) -> Result<Self> {
        let n = one_body.nrows();
        if one_body.ncols() != n || same_spin.dim() != n || opposite_spin.dim() != n {
            return Err(Error::validation(
                "integrals",
                "dimension mismatch between one- and two-body tensors",
            ));
        }
        for p in 0..n {
            for q in 0..n {
                let (a, b) = (one_body[(p, q)], one_body[(q, p)]);
                if (a - b).abs() > tol(a, b) || !a.is_finite() {
                    return Err(Error::validation(
                        format!("one_body[{p}][{q}]"),
                        "one-body tensor is not Hermitian",
                    ));
                }
            }
        }
        check_two_body_symmetry(&same_spin, "same_spin")?;
        check_two_body_symmetry(&opposite_spin, "opposite_spin")?;
        let mut same_spin = same_spin;
        canonicalize_same_spin(&mut same_spin);
        Ok(Self::assemble(one_body, same_spin, opposite_spin, core_energy))
    }

    fn assemble(
        one_body: DMatrix<f64>,
        same_spin: Tensor4,
        opposite_spin: Tensor4,
        core_energy: f64,
    ) -> Self {
        let n = one_body.nrows();
        let density_density = is_density_density(&same_spin) && is_density_density(&opposite_spin);
        let coulomb_same = DMatrix::from_fn(n, n, |p, r| same_spin.get(p, p, r, r));
        let coulomb_opposite = DMatrix::from_fn(n, n, |p, r| opposite_spin.get(p, p, r, r));
        ElectronicIntegrals {
            n_orbitals: n,
            one_body,
            same_spin,
            opposite_spin,
            core_energy,
            density_density,
            coulomb_same,
            coulomb_opposite,
        }
    }

    /// Spin-free integrals: both channels share one tensor.
    pub fn spin_free(one_body: DMatrix<f64>, two_body: Tensor4, core_energy: f64) -> Result<Self> {
        Self::new(one_body, two_body.clone(), two_body, core_energy)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn one_body(&self) -> &DMatrix<f64> {
        &self.one_body
    }

    pub fn same_spin(&self) -> &Tensor4 {
        &self.same_spin
    }

    pub fn opposite_spin(&self) -> &Tensor4 {
        &self.opposite_spin
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    /// True when `g_pqrs = 0` unless `p = q` and `r = s` in both channels.
    pub fn is_density_density(&self) -> bool {
        self.density_density
    }

    #[inline]
    pub(crate) fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[(p, q)]
    }

    #[inline]
    pub(crate) fn g_same(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.same_spin.get(p, q, r, s)
    }

    #[inline]
    pub(crate) fn g_opposite(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.opposite_spin.get(p, q, r, s)
    }

    #[inline]
    pub(crate) fn coulomb_same(&self, p: usize, r: usize) -> f64 {
        self.coulomb_same[(p, r)]
    }

    #[inline]
    pub(crate) fn coulomb_opposite(&self, p: usize, r: usize) -> f64 {
        self.coulomb_opposite[(p, r)]
    }

    /// Copy with the core energy replaced.
    pub fn with_core_energy(&self, core_energy: f64) -> Self {
        let mut out = self.clone();
        out.core_energy = core_energy;
        out
    }

    /// Largest operator-relevant difference between the channels: the
    /// same-spin operator only sees `g_pqrs - g_psrq`.
    pub fn channel_mismatch(&self) -> f64 {
        let n = self.n_orbitals;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let d1 = self.same_spin.get(p, q, r, s) - self.opposite_spin.get(p, q, r, s);
                        let d2 = self.same_spin.get(p, s, r, q) - self.opposite_spin.get(p, s, r, q);
                        worst = worst.max((d1 - d2).abs());
                    }
                }
            }
        }
        worst
    }
}

fn tol(a: f64, b: f64) -> f64 {
    SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check_two_body_symmetry(g: &Tensor4, name: &str) -> Result<()> {
    let n = g.dim();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let a = g.get(p, q, r, s);
                    if !a.is_finite() {
                        return Err(Error::validation(
                            format!("{name}[{p}][{q}][{r}][{s}]"),
                            "non-finite two-body entry",
                        ));
                    }
                    for b in [g.get(q, p, s, r), g.get(r, s, p, q)] {
                        if (a - b).abs() > tol(a, b) {
                            return Err(Error::validation(
                                format!("{name}[{p}][{q}][{r}][{s}]"),
                                "two-body tensor violates g_pqrs = g_qpsr = g_rspq",
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn canonicalize_same_spin(g: &mut Tensor4) {
    let n = g.dim();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if p == r || q == s {
                        g.set(p, q, r, s, 0.0);
                    }
                }
            }
        }
    }
}

fn is_density_density(g: &Tensor4) -> bool {
    let n = g.dim();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if (p != q || r != s) && g.get(p, q, r, s) != 0.0 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Rewrites the extended-Hubbard lattice as electronic integrals:
/// `h_pq = t_pq`, `g_ppqq = 2 V_pq` (p≠q, both channels) and the
/// opposite-spin on-site entry `g_pppp` set per `convention`.
///
/// Only real hopping can be represented; complex hopping is rejected.
pub fn map_to_electronic(
    lat: &LatticeHamiltonian,
    convention: OnSiteConvention,
) -> Result<ElectronicIntegrals> {
    if !lat.is_real() {
        return Err(Error::InvalidInput(
            "complex hopping cannot be mapped to real electronic integrals".into(),
        ));
    }
    let m = lat.n_orbitals();
    let one_body = lat.hopping().map(|z: Complex64| z.re);
    let mut same = Tensor4::zeros(m);
    let mut opp = Tensor4::zeros(m);
    for p in 0..m {
        opp.set(p, p, p, p, convention.factor() * lat.u_intra()[p]);
        for q in 0..m {
            if p != q {
                let v = 2.0 * lat.v_inter()[(p, q)];
                same.set(p, p, q, q, v);
                opp.set(p, p, q, q, v);
            }
        }
    }
    Ok(ElectronicIntegrals::assemble(one_body, same, opp, 0.0))
}

/// Inverse of [`map_to_electronic`] for density-density integrals with
/// matching same-spin and opposite-spin inter-site entries.
pub fn electronic_to_lattice(
    ints: &ElectronicIntegrals,
    convention: OnSiteConvention,
) -> Result<LatticeHamiltonian> {
    if !ints.is_density_density() {
        return Err(Error::InvalidInput(
            "integrals are not of density-density form; no lattice equivalent".into(),
        ));
    }
    if ints.core_energy() != 0.0 {
        return Err(Error::InvalidInput(format!(
            "core energy {} has no lattice representation",
            ints.core_energy()
        )));
    }
    let m = ints.n_orbitals();
    let mut v = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            if p == q {
                continue;
            }
            let (a, b) = (ints.coulomb_same(p, q), ints.coulomb_opposite(p, q));
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidInput(format!(
                    "same-spin ({a}) and opposite-spin ({b}) inter-site entries differ at ({p},{q})"
                )));
            }
            v[(p, q)] = b / 2.0;
        }
    }
    let u = (0..m)
        .map(|p| ints.coulomb_opposite(p, p) / convention.factor())
        .collect();
    LatticeHamiltonian::from_real(ints.one_body().clone(), u, v)
}

fn is_signed_permutation(c: &DMatrix<f64>) -> bool {
    c.iter().all(|x| *x == 0.0 || x.abs() == 1.0)
        && c.row_iter().all(|row| row.iter().filter(|x| **x != 0.0).count() == 1)
}

/// Rotates the orbital basis: `h ← Cᵀ h C`, `g'_pqrs = Σ C_ap C_bq C_cr C_ds g_abcd`.
/// Column `k` of `c` holds the new orbital `k` in the old basis.
pub fn rotate_basis(ints: &ElectronicIntegrals, c: &DMatrix<f64>) -> Result<ElectronicIntegrals> {
    let n = ints.n_orbitals();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "rotation is {}x{}, integrals have {n} orbitals",
            c.nrows(),
            c.ncols()
        )));
    }
    let defect = (c.transpose() * c - DMatrix::<f64>::identity(n, n)).amax();
    if defect > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "basis rotation is not unitary (|CᵀC - I| = {defect:.3e})"
        )));
    }
    if *c == DMatrix::identity(n, n) {
        return Ok(ints.clone());
    }
    let one_body = symmetrize_matrix(c.transpose() * ints.one_body() * c);
    let rotate = |g: &Tensor4| {
        let mut t = g.clone();
        for slot in 0..4 {
            t = t.transform_slot(c, slot);
        }
        symmetrize_tensor(&t)
    };
    let mut same = rotate(ints.same_spin());
    let opp = rotate(ints.opposite_spin());
    canonicalize_same_spin(&mut same);
    let mut out = ElectronicIntegrals::assemble(one_body, same, opp, ints.core_energy());
    // Generic rotations leave round-off in entries that vanish only by
    // structure; the flag survives permutations alone.
    if !is_signed_permutation(c) {
        out.density_density = false;
    }
    Ok(out)
}

fn symmetrize_matrix(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn symmetrize_tensor(g: &Tensor4) -> Tensor4 {
    let n = g.dim();
    Tensor4::from_fn(n, |p, q, r, s| {
        0.25 * (g.get(p, q, r, s) + g.get(q, p, s, r) + g.get(r, s, p, q) + g.get(s, r, q, p))
    })
}
