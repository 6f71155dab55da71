use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProjectedOperator;
use crate::determinant::Determinant;
use crate::linalg::{dot, fix_sign, norm, sorted_symmetric_eigen};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavidsonOptions {
    /// Target for `‖Hv − Ev‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Collapse the search space once it holds this many vectors.
    pub max_subspace: usize,
    /// Dimensions up to this size are diagonalized densely.
    pub dense_threshold: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            tol: 1e-9,
            max_iter: 200,
            max_subspace: 32,
            dense_threshold: 512,
        }
    }
}

/// Lowest eigenpair of a projected Hamiltonian.
#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    /// Unit vector over `determinants`.
    pub ci_vector: Vec<f64>,
    pub determinants: Vec<Determinant>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative energy variance against the full Hamiltonian, when computed.
    pub variance: Option<f64>,
}

impl GroundStateResult {
    pub fn dimension(&self) -> usize {
        self.ci_vector.len()
    }
}

fn residual(op: &ProjectedOperator, x: &[f64], e: f64) -> f64 {
    let mut hx = vec![0.0; x.len()];
    op.matvec(x, &mut hx);
    hx.iter().zip(x).map(|(h, v)| (h - e * v).powi(2)).sum::<f64>().sqrt()
}

fn dense_ground(op: &ProjectedOperator, tol: f64) -> GroundStateResult {
    let (vals, vecs) = sorted_symmetric_eigen(&op.to_dense());
    let x: Vec<f64> = vecs.column(0).iter().copied().collect();
    let r = residual(op, &x, vals[0]);
    GroundStateResult {
        energy: vals[0],
        ci_vector: x,
        determinants: op.determinants().to_vec(),
        residual_norm: r,
        iterations: 1,
        converged: r <= tol.max(1e-11),
        variance: None,
    }
}

/// Orthogonalizes `v` against `basis` twice and normalizes; `None` when
/// nothing is left.
fn orthonormalize(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let start = norm(&v);
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = norm(&v);
    if n <= 1e-10 * start {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Davidson iteration with a diagonal preconditioner. Small problems go to a
/// dense eigensolver. On non-convergence the best estimate is returned with
/// `converged = false`.
pub fn davidson_ground(op: &ProjectedOperator, opts: &DavidsonOptions) -> GroundStateResult {
    let d = op.dimension();
    if d <= opts.dense_threshold {
        return dense_ground(op, opts.tol);
    }
    let diag = op.diagonal();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let push = |basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>, v: Vec<f64>| {
        if let Some(v) = orthonormalize(basis, v) {
            let mut hv = vec![0.0; d];
            op.matvec(&v, &mut hv);
            basis.push(v);
            images.push(hv);
        }
    };
    for &k in order.iter().take(4) {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        push(&mut basis, &mut images, e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let noise: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
    push(&mut basis, &mut images, noise);

    let mut best = (f64::INFINITY, vec![0.0; d], f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let k = basis.len();
        let t = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &images[j]));
        let (theta, y) = sorted_symmetric_eigen(&t);
        let e = theta[0];
        let mut x = vec![0.0; d];
        let mut hx = vec![0.0; d];
        for c in 0..k {
            let w = y[(c, 0)];
            x.iter_mut().zip(&basis[c]).for_each(|(a, b)| *a += w * b);
            hx.iter_mut().zip(&images[c]).for_each(|(a, b)| *a += w * b);
        }
        let r: Vec<f64> = hx.iter().zip(&x).map(|(h, v)| h - e * v).collect();
        let rn = norm(&r);
        if rn < best.2 {
            best = (e, x.clone(), rn);
        }
        if rn <= opts.tol {
            converged = true;
            break;
        }
        let corr: Vec<f64> = r
            .iter()
            .zip(diag)
            .map(|(ri, di)| {
                let den = e - di;
                let den = if den.abs() < 1e-8 { 1e-8f64.copysign(den) } else { den };
                ri / den
            })
            .collect();
        if basis.len() >= opts.max_subspace {
            // Collapse onto the current Ritz vector.
            basis.clear();
            images.clear();
            push(&mut basis, &mut images, x);
        }
        let before = basis.len();
        push(&mut basis, &mut images, corr);
        if basis.len() == before {
            push(&mut basis, &mut images, r);
        }
        if basis.len() == before {
            break;
        }
    }
    let (energy, mut ci_vector, _) = best;
    fix_sign(&mut ci_vector);
    let residual_norm = residual(op, &ci_vector, energy);
    if !converged {
        log::warn!("Davidson stopped after {iterations} iterations with residual {residual_norm:.3e}");
    }
    GroundStateResult {
        energy,
        ci_vector,
        determinants: op.determinants().to_vec(),
        residual_norm,
        iterations,
        converged,
        variance: None,
    }
}
