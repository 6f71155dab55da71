//! Full CI and heat-bath selected CI.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::determinant::{enumerate_sector, for_each_connection, Determinant};
use crate::model::{ElectronicIntegrals, SectorSpec};
use crate::sqd::{davidson_ground, energy_variance, project_determinants, DavidsonOptions, GroundStateResult};
use crate::{Error, Result};

/// Largest sector `fci_ground` will enumerate.
pub const DEFAULT_FCI_CAP: u128 = 1_000_000;

/// Lowest eigenpair over the whole sector.
pub fn fci_ground(
    spec: SectorSpec,
    ints: &ElectronicIntegrals,
    cap: u128,
    opts: &DavidsonOptions,
) -> Result<GroundStateResult> {
    let dets = enumerate_sector(&spec, cap)?;
    let op = project_determinants(dets, ints);
    Ok(davidson_ground(&op, opts))
}

/// Descending selection thresholds and a size cap.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionSchedule {
    epsilons: Vec<f64>,
    max_determinants: usize,
}

impl SelectionSchedule {
    pub fn new(epsilons: Vec<f64>, max_determinants: usize) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::InvalidInput("HCI schedule needs at least one epsilon".into()));
        }
        if epsilons.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidInput("HCI epsilons must be nonnegative".into()));
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("HCI epsilons must be strictly descending".into()));
        }
        if max_determinants < 1 {
            return Err(Error::InvalidInput("HCI cap must admit the reference determinant".into()));
        }
        Ok(SelectionSchedule {
            epsilons,
            max_determinants,
        })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn max_determinants(&self) -> usize {
        self.max_determinants
    }
}

#[derive(Clone, Debug)]
pub struct HciStage {
    pub epsilon: f64,
    /// Variational set size over the sector dimension.
    pub fraction: f64,
    pub result: GroundStateResult,
}

fn solve(dets: &BTreeSet<Determinant>, ints: &ElectronicIntegrals, opts: &DavidsonOptions) -> GroundStateResult {
    davidson_ground(&project_determinants(dets.iter().copied().collect(), ints), opts)
}

/// Heat-bath selected CI from `reference`. At each epsilon the variational
/// set absorbs every determinant `a` with `|H_ai c_i| ≥ ε` for some member
/// `i`, re-diagonalizing until no new determinant qualifies.
pub fn hci_ground(
    spec: SectorSpec,
    ints: &ElectronicIntegrals,
    reference: &Determinant,
    schedule: &SelectionSchedule,
    opts: &DavidsonOptions,
) -> Result<Vec<HciStage>> {
    if !reference.in_sector(&spec) {
        return Err(Error::InvalidInput(format!("reference determinant not in sector {spec}")));
    }
    let total = spec.dimension() as f64;
    let mut dets: BTreeSet<Determinant> = BTreeSet::from([*reference]);
    let mut current = solve(&dets, ints, opts);
    let mut stages = Vec::with_capacity(schedule.epsilons.len());
    for &eps in &schedule.epsilons {
        loop {
            let found: Vec<Vec<Determinant>> = current
                .determinants
                .par_iter()
                .zip(current.ci_vector.par_iter())
                .map(|(d, &c)| {
                    let mut out = Vec::new();
                    for_each_connection(d, ints, |other, v| {
                        if (v * c).abs() >= eps && !dets.contains(&other) {
                            out.push(other);
                        }
                    });
                    out
                })
                .collect();
            let fresh: BTreeSet<Determinant> = found.into_iter().flatten().collect();
            if fresh.is_empty() {
                break;
            }
            let size = dets.len() + fresh.len();
            if size > schedule.max_determinants {
                return Err(Error::CapExceeded {
                    what: "HCI variational space",
                    size: size as u128,
                    cap: schedule.max_determinants as u128,
                });
            }
            dets.extend(fresh);
            current = solve(&dets, ints, opts);
        }
        let mut result = current.clone();
        result.variance = energy_variance(&result, ints).ok();
        stages.push(HciStage {
            epsilon: eps,
            fraction: dets.len() as f64 / total,
            result,
        });
    }
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{map_to_electronic, LatticeHamiltonian, OnSiteConvention};

    fn chain(n: usize, u: f64) -> ElectronicIntegrals {
        map_to_electronic(&LatticeHamiltonian::chain(n, -1.0, u, 0.0).unwrap(), OnSiteConvention::Hamiltonian)
            .unwrap()
    }

    #[test]
    fn fci_dimer_sectors() {
        let ints = chain(2, 4.0);
        let opts = DavidsonOptions::default();
        let e = |na, nb| fci_ground(SectorSpec::new(2, na, nb).unwrap(), &ints, DEFAULT_FCI_CAP, &opts).unwrap().energy;
        assert!((e(1, 0) + 1.0).abs() < 1e-12);
        assert!((e(1, 1) - (2.0 - 8f64.sqrt())).abs() < 1e-12);
        assert!((e(2, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_hci_is_fci() {
        let ints = chain(4, 4.0);
        let spec = SectorSpec::new(4, 2, 2).unwrap();
        let opts = DavidsonOptions::default();
        let fci = fci_ground(spec, &ints, DEFAULT_FCI_CAP, &opts).unwrap();
        let schedule = SelectionSchedule::new(vec![1e-1, 1e-3, 0.0], 1000).unwrap();
        let stages = hci_ground(spec, &ints, &Determinant::from_orbitals(&[0, 2], &[1, 3]), &schedule, &opts).unwrap();
        for w in stages.windows(2) {
            assert!(w[1].result.energy <= w[0].result.energy + 1e-12);
        }
        let last = stages.last().unwrap();
        assert!((last.result.energy - fci.energy).abs() < 1e-10);
        assert!(last.result.variance.unwrap() < 1e-12);
    }

    #[test]
    fn schedule_validation_and_cap() {
        assert!(SelectionSchedule::new(vec![1e-2, 1e-2], 10).is_err());
        assert!(SelectionSchedule::new(vec![], 10).is_err());
        let ints = chain(4, 4.0);
        let spec = SectorSpec::new(4, 2, 2).unwrap();
        let schedule = SelectionSchedule::new(vec![0.0], 3).unwrap();
        let err = hci_ground(spec, &ints, &Determinant::aufbau(2, 2), &schedule, &DavidsonOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }
}
