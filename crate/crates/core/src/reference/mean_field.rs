use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::determinant::{diagonal_energy, Determinant};
use crate::linalg::sorted_symmetric_eigen;
use crate::model::{rotate_basis, ElectronicIntegrals, SectorSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldOptions {
    pub max_iter: usize,
    /// Convergence threshold on the largest density-matrix change.
    pub density_tol: f64,
    /// Fraction of the previous density mixed into the next Fock build.
    pub damping: f64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        MeanFieldOptions {
            max_iter: 500,
            density_tol: 1e-8,
            damping: 0.3,
        }
    }
}

/// Restricted mean-field orbitals and the aufbau reference determinant in
/// the molecular-orbital basis.
#[derive(Clone, Debug)]
pub struct MeanFieldSolution {
    /// Column `k` holds orbital `k` in the input basis.
    pub orbital_coefficients: DMatrix<f64>,
    pub orbital_energies: Vec<f64>,
    pub hf_energy: f64,
    /// Aufbau determinant in the orbital basis of `orbital_coefficients`.
    pub reference: Determinant,
    pub sector: SectorSpec,
    pub converged: bool,
    pub iterations: usize,
    /// Energy of the idempotent density after each iteration.
    pub energy_history: Vec<f64>,
}

impl MeanFieldSolution {
    /// Integrals rotated into this solution's orbital basis.
    pub fn mo_integrals(&self, ints: &ElectronicIntegrals) -> Result<ElectronicIntegrals> {
        rotate_basis(ints, &self.orbital_coefficients)
    }

    /// Reuses these orbitals for another sector, filling by aufbau.
    pub fn for_sector(&self, ints: &ElectronicIntegrals, spec: SectorSpec) -> Result<Self> {
        let reference = Determinant::aufbau(spec.n_alpha, spec.n_beta);
        let mo = self.mo_integrals(ints)?;
        Ok(MeanFieldSolution {
            reference,
            sector: spec,
            hf_energy: diagonal_energy(&reference, &mo),
            ..self.clone()
        })
    }
}

fn density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    &occ * occ.transpose()
}

/// Coulomb-minus-exchange and opposite-spin Coulomb contractions.
struct FockParts {
    same: DMatrix<f64>,
    opposite: DMatrix<f64>,
}

fn contract(ints: &ElectronicIntegrals, d: &DMatrix<f64>) -> FockParts {
    let n = ints.n_orbitals();
    let ss = ints.same_spin();
    let os = ints.opposite_spin();
    let mut same = DMatrix::zeros(n, n);
    let mut opposite = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            let (mut js, mut jo) = (0.0, 0.0);
            for r in 0..n {
                for s in 0..n {
                    let w = d[(r, s)];
                    if w == 0.0 {
                        continue;
                    }
                    js += (ss.get(p, q, r, s) - ss.get(p, s, r, q)) * w;
                    jo += os.get(p, q, r, s) * w;
                }
            }
            same[(p, q)] = js;
            opposite[(p, q)] = jo;
        }
    }
    FockParts { same, opposite }
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn determinant_energy(ints: &ElectronicIntegrals, da: &DMatrix<f64>, db: &DMatrix<f64>) -> f64 {
    let fa = contract(ints, da);
    let fb = contract(ints, db);
    ints.core_energy()
        + trace_product(ints.one_body(), &(da + db))
        + 0.5 * (trace_product(da, &fa.same) + trace_product(db, &fb.same))
        + trace_product(da, &fb.opposite)
}

/// Self-consistent field with density damping.
///
/// Closed-shell sectors run restricted Hartree–Fock. Open-shell sectors use
/// one set of orbitals from the spin-averaged Fock operator.
pub fn solve_mean_field(
    ints: &ElectronicIntegrals,
    spec: SectorSpec,
    opts: &MeanFieldOptions,
) -> Result<MeanFieldSolution> {
    let n = ints.n_orbitals();
    if spec.n_orbitals != n {
        return Err(Error::InvalidInput(format!(
            "sector has {} orbitals, integrals have {n}",
            spec.n_orbitals
        )));
    }
    let (mut energies, mut c) = sorted_symmetric_eigen(ints.one_body());
    let mut da = density(&c, spec.n_alpha);
    let mut db = density(&c, spec.n_beta);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=opts.max_iter {
        iterations = iter;
        let fa = contract(ints, &da);
        let fb = contract(ints, &db);
        let fock_a = ints.one_body() + &fa.same + &fb.opposite;
        let fock_b = ints.one_body() + &fb.same + &fa.opposite;
        let fock = (fock_a + fock_b) * 0.5;
        let (e, vecs) = sorted_symmetric_eigen(&fock);
        let new_da = density(&vecs, spec.n_alpha);
        let new_db = density(&vecs, spec.n_beta);
        let energy = determinant_energy(ints, &new_da, &new_db);
        if !energy.is_finite() {
            return Err(Error::Numerical(format!(
                "mean-field energy diverged at iteration {iter}"
            )));
        }
        history.push(energy);
        let change = (&new_da - &da).amax().max((&new_db - &db).amax());
        energies = e;
        c = vecs;
        if change < opts.density_tol {
            converged = true;
            break;
        }
        let keep = opts.damping;
        da = new_da * (1.0 - keep) + da * keep;
        db = new_db * (1.0 - keep) + db * keep;
    }
    if !converged {
        log::warn!("mean field did not converge in {} iterations", opts.max_iter);
    }
    let reference = Determinant::aufbau(spec.n_alpha, spec.n_beta);
    let mo = rotate_basis(ints, &c)?;
    Ok(MeanFieldSolution {
        orbital_coefficients: c,
        orbital_energies: energies,
        hf_energy: diagonal_energy(&reference, &mo),
        reference,
        sector: spec,
        converged,
        iterations,
        energy_history: history,
    })
}
