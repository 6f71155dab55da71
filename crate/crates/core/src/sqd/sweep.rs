use std::collections::{BTreeSet, HashMap};

use super::{build_subspace, davidson_ground, project_hamiltonian, DavidsonOptions, GroundStateResult, SubspaceBasis};
use crate::determinant::{diagonal_energy, for_each_connection, generate_excitations, Determinant, ExcitationLevels};
use crate::lucj_sim::SampleSet;
use crate::model::{ElectronicIntegrals, SectorSpec};
use crate::{Error, Result};

/// One point of a fraction sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub target_fraction: f64,
    pub basis: SubspaceBasis,
    pub result: GroundStateResult,
}

impl SweepPoint {
    pub fn fraction(&self) -> f64 {
        self.basis.fraction()
    }
}

/// Projects, diagonalizes and attaches the full-space variance.
pub fn solve_subspace(
    basis: &SubspaceBasis,
    ints: &ElectronicIntegrals,
    opts: &DavidsonOptions,
) -> Result<GroundStateResult> {
    let op = project_hamiltonian(basis, ints);
    let mut result = davidson_ground(&op, opts);
    result.variance = energy_variance(&result, ints).ok();
    Ok(result)
}

/// SQD ground states on nested subspaces for increasing fractions.
pub fn sqd_sweep(
    samples: &SampleSet,
    spec: SectorSpec,
    ints: &ElectronicIntegrals,
    fractions: &[f64],
    reference: &Determinant,
    opts: &DavidsonOptions,
) -> Result<Vec<SweepPoint>> {
    if fractions.is_empty() {
        return Err(Error::InvalidInput("fraction list is empty".into()));
    }
    for w in fractions.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(format!(
                "fractions must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut out: Vec<SweepPoint> = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let basis = build_subspace(samples, spec, f, reference)?;
        let result = match out.last() {
            Some(prev) if prev.basis == basis => prev.result.clone(),
            _ => solve_subspace(&basis, ints, opts)?,
        };
        out.push(SweepPoint {
            target_fraction: f,
            basis,
            result,
        });
    }
    Ok(out)
}

/// Keeps determinants with `|c|² ≥ threshold`, adds their excitations at
/// `levels`, and closes the result into product form.
pub fn extsqd_expand(
    prev: &GroundStateResult,
    spec: SectorSpec,
    threshold: f64,
    levels: ExcitationLevels,
) -> Result<SubspaceBasis> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} must be nonnegative")));
    }
    if !prev.converged {
        log::warn!("expanding an unconverged subspace solution");
    }
    let kept: Vec<Determinant> = prev
        .determinants
        .iter()
        .zip(&prev.ci_vector)
        .filter(|(_, c)| c.powi(2) >= threshold)
        .map(|(d, _)| *d)
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput(format!(
            "threshold {threshold:e} removes every determinant"
        )));
    }
    let mut all: BTreeSet<Determinant> = kept.iter().copied().collect();
    for d in &kept {
        all.extend(generate_excitations(d, levels, spec.n_orbitals));
    }
    SubspaceBasis::closure(spec, &all.into_iter().collect::<Vec<_>>())
}

/// `(⟨H²⟩ − ⟨H⟩²)/⟨H⟩²` for the CI vector of `g`, with `H` acting on the full
/// sector rather than the subspace.
pub fn energy_variance(g: &GroundStateResult, ints: &ElectronicIntegrals) -> Result<f64> {
    let norm2: f64 = g.ci_vector.iter().map(|c| c * c).sum();
    if norm2 == 0.0 {
        return Err(Error::InvalidInput("zero CI vector".into()));
    }
    let mut sigma: HashMap<Determinant, f64> = HashMap::new();
    for (d, &c) in g.determinants.iter().zip(&g.ci_vector) {
        if c == 0.0 {
            continue;
        }
        *sigma.entry(*d).or_default() += diagonal_energy(d, ints) * c;
        for_each_connection(d, ints, |other, v| {
            *sigma.entry(other).or_default() += v * c;
        });
    }
    let mean = g
        .determinants
        .iter()
        .zip(&g.ci_vector)
        .map(|(d, c)| c * sigma.get(d).copied().unwrap_or(0.0))
        .sum::<f64>()
        / norm2;
    if mean == 0.0 {
        return Err(Error::Numerical("energy variance undefined for ⟨H⟩ = 0".into()));
    }
    let coeff: HashMap<Determinant, f64> = g.determinants.iter().copied().zip(g.ci_vector.iter().copied()).collect();
    let mut keys: Vec<&Determinant> = sigma.keys().collect();
    keys.sort_unstable();
    let spread: f64 = keys
        .into_iter()
        .map(|d| {
            let r = sigma[d] - mean * coeff.get(d).copied().unwrap_or(0.0);
            r * r
        })
        .sum::<f64>()
        / norm2;
    Ok(spread / (mean * mean))
}
