use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};

use super::T2Amplitudes;
use crate::linalg::sorted_symmetric_eigen;
use crate::{Error, Result};

/// Which density-density couplings a layer may carry.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityMask {
    pub same_spin: DMatrix<bool>,
    pub opposite_spin: DMatrix<bool>,
}

impl ConnectivityMask {
    /// All-to-all same-spin couplings, opposite-spin couplings between
    /// orbitals at most one index apart.
    pub fn local(n: usize) -> Self {
        ConnectivityMask {
            same_spin: DMatrix::from_element(n, n, true),
            opposite_spin: DMatrix::from_fn(n, n, |p, q| p.abs_diff(q) <= 1),
        }
    }

    pub fn all_to_all(n: usize) -> Self {
        ConnectivityMask {
            same_spin: DMatrix::from_element(n, n, true),
            opposite_spin: DMatrix::from_element(n, n, true),
        }
    }

    fn apply(&self, j: &DMatrix<f64>, same: bool) -> DMatrix<f64> {
        let mask = if same { &self.same_spin } else { &self.opposite_spin };
        DMatrix::from_fn(j.nrows(), j.ncols(), |p, q| {
            if mask[(p, q)] && mask[(q, p)] {
                j[(p, q)]
            } else {
                0.0
            }
        })
    }
}

/// One `e^{K} e^{iJ} e^{-K}` block.
#[derive(Clone, Debug, PartialEq)]
pub struct LucjLayer {
    /// Real antisymmetric orbital-rotation generator.
    pub k: DMatrix<f64>,
    pub j_same: DMatrix<f64>,
    pub j_opposite: DMatrix<f64>,
}

impl LucjLayer {
    pub fn zero(n: usize) -> Self {
        LucjLayer {
            k: DMatrix::zeros(n, n),
            j_same: DMatrix::zeros(n, n),
            j_opposite: DMatrix::zeros(n, n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LucjParameters {
    pub n_orbitals: usize,
    pub layers: Vec<LucjLayer>,
    pub mask: ConnectivityMask,
}

impl LucjParameters {
    pub fn zero(n_orbitals: usize, n_layers: usize) -> Self {
        LucjParameters {
            n_orbitals,
            layers: vec![LucjLayer::zero(n_orbitals); n_layers],
            mask: ConnectivityMask::local(n_orbitals),
        }
    }

    /// Checks antisymmetry of `K`, symmetry of `J` and the mask.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        for (mu, layer) in self.layers.iter().enumerate() {
            for (name, m) in [("K", &layer.k), ("J_same", &layer.j_same), ("J_opposite", &layer.j_opposite)] {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::InvalidInput(format!("layer {mu}: {name} is not {n}x{n}")));
                }
            }
            if (&layer.k + layer.k.transpose()).amax() > 1e-12 {
                return Err(Error::InvalidInput(format!("layer {mu}: K is not antisymmetric")));
            }
            for (name, j, mask) in [
                ("J_same", &layer.j_same, &self.mask.same_spin),
                ("J_opposite", &layer.j_opposite, &self.mask.opposite_spin),
            ] {
                if (j - j.transpose()).amax() > 1e-12 {
                    return Err(Error::InvalidInput(format!("layer {mu}: {name} is not symmetric")));
                }
                for p in 0..n {
                    for q in 0..n {
                        if !mask[(p, q)] && j[(p, q)] != 0.0 {
                            return Err(Error::InvalidInput(format!(
                                "layer {mu}: {name}[{p}][{q}] is masked but nonzero"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Real logarithm of a proper orthogonal matrix via its real Schur form.
pub(crate) fn log_orthogonal(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    let (q, t) = Schur::new(w.clone()).unpack();
    let mut l = DMatrix::zeros(n, n);
    let mut flipped = Vec::new();
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)].abs() > 1e-10 {
            let s = 0.5 * (t[(k + 1, k)] - t[(k, k + 1)]);
            let c = 0.5 * (t[(k, k)] + t[(k + 1, k + 1)]);
            let theta = s.atan2(c);
            l[(k + 1, k)] = theta;
            l[(k, k + 1)] = -theta;
            k += 2;
        } else {
            if t[(k, k)] < 0.0 {
                flipped.push(k);
            }
            k += 1;
        }
    }
    if flipped.len() % 2 == 1 {
        return Err(Error::Numerical(
            "orbital rotation has determinant -1; no real generator exists".into(),
        ));
    }
    for pair in flipped.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        l[(b, a)] = PI;
        l[(a, b)] = -PI;
    }
    let k = &q * l * q.transpose();
    Ok((&k - k.transpose()) * 0.5)
}

/// LUCJ parameters from doubles amplitudes by double factorization.
///
/// The amplitude matrix `T[(i,a),(j,b)] = t2[i][j][a][b]` is diagonalized;
/// each leading eigenpair `(λ, x)` becomes one layer. The occupied–virtual
/// coupling `x` is lifted to a symmetric orbital operator, whose eigenbasis
/// `W` supplies `K = log W` and whose eigenvalues `w` supply
/// `J = (λ/2) w wᵀ`, truncated to `mask`.
pub fn lucj_from_t2(t2: &T2Amplitudes, n_layers: usize, mask: &ConnectivityMask) -> Result<LucjParameters> {
    let n = t2.n_orbitals();
    let (o, v) = (t2.n_occ(), t2.n_vir());
    let mut params = LucjParameters {
        n_orbitals: n,
        layers: vec![LucjLayer::zero(n); n_layers],
        mask: mask.clone(),
    };
    if o == 0 || v == 0 || t2.is_zero() {
        return Ok(params);
    }
    let dim = o * v;
    let tmat = DMatrix::from_fn(dim, dim, |x, y| t2.get(x / v, y / v, x % v, y % v));
    let (lambdas, vecs) = sorted_symmetric_eigen(&tmat);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| lambdas[b].abs().total_cmp(&lambdas[a].abs()).then(a.cmp(&b)));

    for (layer, &idx) in params.layers.iter_mut().zip(&order) {
        let lambda = lambdas[idx];
        if lambda.abs() < 1e-14 {
            break;
        }
        let mut s = DMatrix::zeros(n, n);
        for i in 0..o {
            for a in 0..v {
                let x = vecs[(i * v + a, idx)];
                s[(i, o + a)] = x;
                s[(o + a, i)] = x;
            }
        }
        let (w, mut basis) = sorted_symmetric_eigen(&s);
        if basis.determinant() < 0.0 {
            basis.column_mut(0).neg_mut();
        }
        layer.k = log_orthogonal(&basis)?;
        let j = DMatrix::from_fn(n, n, |p, q| 0.5 * lambda * (w[p] * w[q]));
        layer.j_same = mask.apply(&j, true);
        layer.j_opposite = mask.apply(&j, false);
    }
    params.validate()?;
    Ok(params)
}
