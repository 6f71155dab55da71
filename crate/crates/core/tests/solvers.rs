mod common;

use std::collections::BTreeMap;

use common::*;
use hsqd_core::determinant::{Determinant, ExcitationLevels};
use hsqd_core::lucj_sim::*;
use hsqd_core::model::*;
use hsqd_core::reference::*;
use hsqd_core::selci::*;
use hsqd_core::sqd::*;
use rand::Rng;

struct Instance {
    spec: SectorSpec,
    site: ElectronicIntegrals,
    mf: MeanFieldSolution,
    mo: ElectronicIntegrals,
}

fn instance(lat: &LatticeHamiltonian, na: usize, nb: usize) -> Instance {
    let m = lat.n_orbitals();
    let spec = SectorSpec::new(m, na, nb).unwrap();
    let site = map_to_electronic(lat, OnSiteConvention::Hamiltonian).unwrap();
    let mf = solve_mean_field(&site, spec, &MeanFieldOptions::default()).unwrap();
    let mo = mf.mo_integrals(&site).unwrap();
    Instance { spec, site, mf, mo }
}

fn random_instance(r: &mut impl Rng) -> Instance {
    let m = r.random_range(2..=6);
    let lat = random_lattice(r, m);
    instance(&lat, m.div_ceil(2), m / 2)
}

/// Samples from an LUCJ state with random generators.
fn lucj_samples(r: &mut impl Rng, inst: &Instance, shots: u64) -> SampleSet {
    let m = inst.spec.n_orbitals;
    let mut params = LucjParameters::zero(m, 1);
    for p in 0..m {
        for q in p + 1..m {
            let x = r.random_range(-0.6..0.6);
            params.layers[0].k[(p, q)] = x;
            params.layers[0].k[(q, p)] = -x;
            params.layers[0].j_same[(p, q)] = x;
            params.layers[0].j_same[(q, p)] = x;
            if q == p + 1 {
                params.layers[0].j_opposite[(p, q)] = 2.0 * x;
                params.layers[0].j_opposite[(q, p)] = 2.0 * x;
            }
        }
    }
    let state = build_state(&params, &inst.mf.reference, inst.spec, DEFAULT_STATE_CAP).unwrap();
    sample(&state, shots, r.random()).unwrap()
}

/// Samples drawn from the exact ground-state distribution.
fn fci_samples(inst: &Instance, shots: u64, seed: u64) -> SampleSet {
    let g = fci_ground(inst.spec, &inst.mo, DEFAULT_FCI_CAP, &DavidsonOptions::default()).unwrap();
    let mut r = rng(seed);
    let cumulative: Vec<f64> = g
        .ci_vector
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c * c;
            Some(*acc)
        })
        .collect();
    let mut counts: BTreeMap<Determinant, u64> = BTreeMap::new();
    for _ in 0..shots {
        let x = r.random::<f64>() * cumulative.last().unwrap();
        let k = cumulative.partition_point(|c| *c < x).min(cumulative.len() - 1);
        *counts.entry(g.determinants[k]).or_default() += 1;
    }
    SampleSet::from_counts(counts, Provenance::File, Some(seed))
}

#[test]
fn dimer_sectors_match_closed_form() {
    let lat = LatticeHamiltonian::chain(2, -1.0, 4.0, 0.0).unwrap();
    for ((na, nb), expect) in [((1, 0), -1.0), ((1, 1), 2.0 - 8f64.sqrt()), ((2, 1), 3.0)] {
        let inst = instance(&lat, na, nb);
        assert!((ground_energy_lattice(&lat, na, nb) - expect).abs() < 1e-12);
        let fci = fci_ground(inst.spec, &inst.site, DEFAULT_FCI_CAP, &DavidsonOptions::default()).unwrap();
        assert!((fci.energy - expect).abs() < 1e-10);
        let schedule = SelectionSchedule::new(vec![1e-2, 0.0], 1000).unwrap();
        let hci = hci_ground(inst.spec, &inst.mo, &inst.mf.reference, &schedule, &DavidsonOptions::default()).unwrap();
        assert!((hci.last().unwrap().result.energy - expect).abs() < 1e-10);
        let full = SubspaceBasis::full(inst.spec);
        let samples = SampleSet::from_counts(
            full.determinants().into_iter().map(|d| (d, 1)).collect(),
            Provenance::File,
            None,
        );
        let sweep = sqd_sweep(&samples, inst.spec, &inst.mo, &[1.0], &inst.mf.reference, &DavidsonOptions::default()).unwrap();
        assert!((sweep[0].result.energy - expect).abs() < 1e-10);
    }
}

#[test]
fn fci_agrees_with_fock_oracle() {
    let mut r = rng(41);
    for _ in 0..10 {
        let inst = random_instance(&mut r);
        let oracle = ground_energy_electronic(&inst.site, inst.spec.n_alpha, inst.spec.n_beta);
        let fci = fci_ground(inst.spec, &inst.site, DEFAULT_FCI_CAP, &DavidsonOptions::default()).unwrap();
        let fci_mo = fci_ground(inst.spec, &inst.mo, DEFAULT_FCI_CAP, &DavidsonOptions::default()).unwrap();
        assert!((fci.energy - oracle).abs() <= 1e-9, "{} vs {oracle}", fci.energy);
        assert!((fci_mo.energy - oracle).abs() <= 1e-9);
    }
}

#[test]
fn variational_chain_on_20_instances() {
    let mut r = rng(42);
    let opts = DavidsonOptions::default();
    let slack = 1e-12;
    for case in 0..20 {
        let inst = random_instance(&mut r);
        let samples = lucj_samples(&mut r, &inst, 20_000);
        let fractions = [0.2, 0.4, 0.7, 1.0];
        let sweep = sqd_sweep(&samples, inst.spec, &inst.mo, &fractions, &inst.mf.reference, &opts).unwrap();
        for w in sweep.windows(2) {
            assert!(w[0].basis.is_subset_of(&w[1].basis));
            assert!(w[1].result.energy <= w[0].result.energy + slack, "case {case}: sweep rose");
        }
        let fci = fci_ground(inst.spec, &inst.mo, DEFAULT_FCI_CAP, &opts).unwrap().energy;
        let sqd = &sweep[1];
        let ext_basis = extsqd_expand(&sqd.result, inst.spec, 1e-4, ExcitationLevels::SINGLES).unwrap();
        let ext = solve_subspace(&ext_basis, &inst.mo, &opts).unwrap().energy;
        assert!(fci <= ext + slack, "case {case}: FCI {fci} above Ext-SQD {ext}");
        assert!(ext <= sqd.result.energy + slack, "case {case}: Ext-SQD {ext} above SQD {}", sqd.result.energy);
        assert!(sqd.result.energy <= inst.mf.hf_energy + slack, "case {case}: SQD above HF");
        assert!((sweep.last().unwrap().result.energy - fci).abs() <= 1e-9);
    }
}

#[test]
fn four_site_fci_distribution_sweep_reaches_exact_energy() {
    let lat = LatticeHamiltonian::chain(4, -1.0, 4.0, 0.0).unwrap();
    let inst = instance(&lat, 2, 2);
    let opts = DavidsonOptions::default();
    let fci = fci_ground(inst.spec, &inst.mo, DEFAULT_FCI_CAP, &opts).unwrap().energy;
    let samples = fci_samples(&inst, 200_000, 7);
    let sweep = sqd_sweep(&samples, inst.spec, &inst.mo, &[0.1, 0.25, 0.5, 0.75, 1.0], &inst.mf.reference, &opts).unwrap();
    let errors: Vec<f64> = sweep.iter().map(|p| p.result.energy - fci).collect();
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{errors:?}");
    }
    assert!(errors.last().unwrap().abs() < 1e-8, "{errors:?}");
}

#[test]
fn extsqd_expansion_is_variational_superset() {
    let lat = LatticeHamiltonian::chain(4, -1.0, 3.0, 0.5).unwrap();
    let inst = instance(&lat, 2, 2);
    let opts = DavidsonOptions::default();
    let samples = fci_samples(&inst, 5_000, 3);
    let sweep = sqd_sweep(&samples, inst.spec, &inst.mo, &[0.2], &inst.mf.reference, &opts).unwrap();
    let prev = &sweep[0];
    let basis = extsqd_expand(&prev.result, inst.spec, 0.0, ExcitationLevels::SINGLES).unwrap();
    assert!(prev.basis.is_subset_of(&basis));
    let e = solve_subspace(&basis, &inst.mo, &opts).unwrap().energy;
    assert!(e <= prev.result.energy + 1e-12);
    assert!(extsqd_expand(&prev.result, inst.spec, 2.0, ExcitationLevels::SINGLES).is_err());
}

#[test]
fn exhaustive_hci_has_machine_precision_variance() {
    let mut r = rng(43);
    let opts = DavidsonOptions::default();
    let schedule = SelectionSchedule::new(vec![1e-2, 1e-4, 0.0], 1_000_000).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let inst = random_instance(&mut r);
        let stages = hci_ground(inst.spec, &inst.mo, &inst.mf.reference, &schedule, &opts).unwrap();
        let last = stages.last().unwrap();
        let fci = fci_ground(inst.spec, &inst.mo, DEFAULT_FCI_CAP, &opts).unwrap().energy;
        assert!((last.result.energy - fci).abs() <= 1e-10);
        let var = last.result.variance.unwrap();
        assert!(var >= -1e-12);
        worst = worst.max(var);
        for w in stages.windows(2) {
            assert!(w[1].fraction >= w[0].fraction);
            assert!(w[1].result.energy <= w[0].result.energy + 1e-12);
        }
    }
    assert!(worst <= 1e-12, "largest variance {worst:e}");
}

#[test]
fn variance_matches_dense_moments() {
    let lat = LatticeHamiltonian::chain(3, -1.0, 2.0, 0.4).unwrap();
    let inst = instance(&lat, 2, 1);
    let dets = sector_dets(3, 2, 1);
    let h = dense(&dets, 3, |s| apply_electronic(&inst.mo, s));
    let basis = SubspaceBasis::new(inst.spec, vec![0b011, 0b101], vec![0b001]).unwrap();
    let g = solve_subspace(&basis, &inst.mo, &DavidsonOptions::default()).unwrap();
    let mut c = nalgebra::DVector::zeros(dets.len());
    for (d, x) in g.determinants.iter().zip(&g.ci_vector) {
        c[dets.iter().position(|e| e == d).unwrap()] = *x;
    }
    let hc = &h * &c;
    let e = c.dot(&hc);
    let expect = (hc.dot(&hc) - e * e) / (e * e);
    assert!((energy_variance(&g, &inst.mo).unwrap() - expect).abs() <= 1e-12);
}

#[test]
fn davidson_agrees_with_dense_diagonalization() {
    let mut r = rng(44);
    for _ in 0..6 {
        let inst = random_instance(&mut r);
        let op = project_hamiltonian(&SubspaceBasis::full(inst.spec), &inst.mo);
        let dense_e = lowest(&op.to_dense());
        let iterative = davidson_ground(&op, &DavidsonOptions { dense_threshold: 0, ..Default::default() });
        assert!(iterative.converged);
        assert!((iterative.energy - dense_e).abs() <= 1e-9, "{} vs {dense_e}", iterative.energy);
        let direct = davidson_ground(&op, &DavidsonOptions::default());
        assert!((direct.energy - dense_e).abs() <= 1e-9);
    }
}

#[test]
fn projected_operator_matches_oracle_submatrix() {
    let mut r = rng(45);
    let inst = random_instance(&mut r);
    let basis = SubspaceBasis::full(inst.spec);
    let op = project_hamiltonian(&basis, &inst.mo);
    let dets = op.determinants().to_vec();
    let oracle = dense(&dets, inst.spec.n_orbitals, |s| apply_electronic(&inst.mo, s));
    assert!((op.to_dense() - &oracle).abs().max() <= 1e-12);
    assert!((&oracle - oracle.transpose()).abs().max() <= 1e-12);
}

fn run_pipeline(threads: usize) -> (Vec<u64>, Vec<f64>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let lat = LatticeHamiltonian::chain(6, -1.0, 4.0, 0.5).unwrap();
        let inst = instance(&lat, 3, 3);
        let mp2 = mp2_doubles(&inst.mf, &inst.mo).unwrap();
        let params = lucj_from_t2(&mp2.t2, 1, &ConnectivityMask::local(6)).unwrap();
        let state = build_state(&params, &inst.mf.reference, inst.spec, DEFAULT_STATE_CAP).unwrap();
        let samples = sample(&state, 100_000, 9).unwrap();
        let opts = DavidsonOptions { dense_threshold: 64, ..Default::default() };
        let sweep = sqd_sweep(&samples, inst.spec, &inst.mo, &[0.3, 0.6, 1.0], &inst.mf.reference, &opts).unwrap();
        let strings = sweep.iter().flat_map(|p| p.basis.alpha_strings().to_vec()).collect();
        let energies = sweep.iter().map(|p| p.result.energy).collect();
        (strings, energies)
    })
}

#[test]
fn results_are_deterministic_across_thread_counts() {
    let one = run_pipeline(1);
    assert_eq!(one, run_pipeline(1));
    let four = run_pipeline(4);
    assert_eq!(four, run_pipeline(4));
    assert_eq!(one.0, four.0);
    for (a, b) in one.1.iter().zip(&four.1) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn hci_respects_its_determinant_cap() {
    let lat = LatticeHamiltonian::chain(6, -1.0, 4.0, 0.0).unwrap();
    let inst = instance(&lat, 3, 3);
    let schedule = SelectionSchedule::new(vec![0.0], 50).unwrap();
    let err = hci_ground(inst.spec, &inst.mo, &inst.mf.reference, &schedule, &DavidsonOptions::default()).unwrap_err();
    assert!(matches!(err, hsqd_core::Error::CapExceeded { .. }), "{err}");
}
