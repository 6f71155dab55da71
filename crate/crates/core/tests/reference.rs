mod common;

use common::*;
use hsqd_core::determinant::{diagonal_energy, Determinant};
use hsqd_core::model::*;
use hsqd_core::reference::*;
use proptest::prelude::*;
use rand::Rng;

fn closed_shell(m: usize) -> SectorSpec {
    SectorSpec::new(m, m / 2, m / 2).unwrap()
}

/// Second-order Rayleigh–Schrödinger energy with the Fock zeroth-order
/// Hamiltonian, summed over every doubly excited determinant.
fn mp2_sum_over_states(mo: &ElectronicIntegrals, eps: &[f64], reference: &Determinant) -> f64 {
    let m = mo.n_orbitals();
    let spec_na = reference.n_alpha();
    let spec_nb = reference.n_beta();
    let zeroth = |d: &Determinant| -> f64 {
        (0..m)
            .map(|p| eps[p] * ((d.alpha >> p & 1) + (d.beta >> p & 1)) as f64)
            .sum()
    };
    let h0 = apply_electronic(mo, fock_state(reference, m));
    let e_ref = zeroth(reference);
    let mut e2 = 0.0;
    for d in sector_dets(m, spec_na, spec_nb) {
        let rank = ((d.alpha ^ reference.alpha).count_ones() + (d.beta ^ reference.beta).count_ones()) / 2;
        if rank != 2 {
            continue;
        }
        let v = h0.get(&fock_state(&d, m)).copied().unwrap_or(0.0);
        e2 += v * v / (e_ref - zeroth(&d));
    }
    e2
}

#[test]
fn dimer_mean_field_and_mp2_match_analytic_values() {
    let lat = LatticeHamiltonian::chain(2, -1.0, 4.0, 0.0).unwrap();
    let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
    let mf = solve_mean_field(&ints, closed_shell(2), &MeanFieldOptions::default()).unwrap();
    assert!(mf.converged);
    assert!(mf.hf_energy.abs() < 1e-10, "{}", mf.hf_energy);
    let mo = mf.mo_integrals(&ints).unwrap();
    let mp2 = mp2_doubles(&mf, &mo).unwrap();
    let oracle = mp2_sum_over_states(&mo, &mf.orbital_energies, &mf.reference);
    assert!((oracle + 1.0).abs() < 1e-10, "oracle {oracle}");
    assert!((mp2.correlation_energy - oracle).abs() < 1e-10, "{}", mp2.correlation_energy);
}

#[test]
fn mp2_matches_sum_over_states_on_random_lattices() {
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 10 {
        let m = 2 * r.random_range(1..=3);
        let lat = random_lattice(&mut r, m);
        let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
        let Ok(mf) = solve_mean_field(&ints, closed_shell(m), &MeanFieldOptions::default()) else {
            continue;
        };
        if !mf.converged {
            continue;
        }
        let mo = mf.mo_integrals(&ints).unwrap();
        let Ok(mp2) = mp2_doubles(&mf, &mo) else {
            continue;
        };
        let oracle = mp2_sum_over_states(&mo, &mf.orbital_energies, &mf.reference);
        assert!(
            (mp2.correlation_energy - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()),
            "M={m}: {} vs {oracle}",
            mp2.correlation_energy
        );
        checked += 1;
    }
}

#[test]
fn noninteracting_mean_field_fills_lowest_levels() {
    let mut r = rng(22);
    for m in [2, 4, 6] {
        let lat = random_lattice(&mut r, m).without_u().without_v();
        let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
        let mf = solve_mean_field(&ints, closed_shell(m), &MeanFieldOptions::default()).unwrap();
        let mut eps: Vec<f64> = ints.one_body().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eps.sort_by(f64::total_cmp);
        let expect: f64 = 2.0 * eps[..m / 2].iter().sum::<f64>();
        assert!((mf.hf_energy - expect).abs() < 1e-10);
        let mo = mf.mo_integrals(&ints).unwrap();
        let mp2 = mp2_doubles(&mf, &mo).unwrap();
        assert!(mp2.t2.is_zero());
        assert_eq!(mp2.correlation_energy, 0.0);
    }
}

#[test]
fn diagonal_hopping_gives_identity_orbitals() {
    let t = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, -1.0, 2.0, 0.9]));
    let lat = LatticeHamiltonian::from_real(t, vec![0.0; 4], nalgebra::DMatrix::zeros(4, 4)).unwrap();
    let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
    let mf = solve_mean_field(&ints, closed_shell(4), &MeanFieldOptions::default()).unwrap();
    assert_eq!(mf.orbital_energies, vec![-1.0, 0.3, 0.9, 2.0]);
    let c = mf.orbital_coefficients.map(f64::abs);
    for (k, site) in [1, 0, 3, 2].into_iter().enumerate() {
        assert!((c[(site, k)] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn degenerate_gap_is_rejected() {
    // Four-site ring at half filling has a degenerate Fermi level.
    let mut t = nalgebra::DMatrix::zeros(4, 4);
    for p in 0..4 {
        t[(p, (p + 1) % 4)] = -1.0;
        t[((p + 1) % 4, p)] = -1.0;
    }
    let lat = LatticeHamiltonian::from_real(t, vec![0.0; 4], nalgebra::DMatrix::zeros(4, 4)).unwrap();
    let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
    let mf = solve_mean_field(&ints, closed_shell(4), &MeanFieldOptions::default()).unwrap();
    let mo = mf.mo_integrals(&ints).unwrap();
    assert!(mp2_doubles(&mf, &mo).is_err());
}

#[test]
fn scf_energy_settles_monotonically() {
    let mut r = rng(23);
    for _ in 0..10 {
        let m = 2 * r.random_range(1..=3);
        let lat = random_lattice(&mut r, m);
        let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
        let mf = solve_mean_field(&ints, closed_shell(m), &MeanFieldOptions::default()).unwrap();
        let mo = mf.mo_integrals(&ints).unwrap();
        assert!((mf.hf_energy - diagonal_energy(&mf.reference, &mo)).abs() <= 1e-10);
        if !mf.converged {
            continue;
        }
        let h = &mf.energy_history;
        let tail = &h[h.len().saturating_sub(10)..];
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "energy rose from {} to {}", w[0], w[1]);
        }
    }
}

#[test]
fn shared_orbitals_serve_charged_sectors() {
    let lat = LatticeHamiltonian::chain(4, -1.0, 3.0, 0.5).unwrap();
    let ints = map_to_electronic(&lat, OnSiteConvention::Hamiltonian).unwrap();
    let mf = solve_mean_field(&ints, closed_shell(4), &MeanFieldOptions::default()).unwrap();
    let plus = mf.for_sector(&ints, SectorSpec::new(4, 3, 2).unwrap()).unwrap();
    assert_eq!(plus.reference, Determinant::aufbau(3, 2));
    let mo = plus.mo_integrals(&ints).unwrap();
    assert!((plus.hf_energy - diagonal_energy(&plus.reference, &mo)).abs() <= 1e-10);
    let own = solve_mean_field(&ints, SectorSpec::new(4, 3, 2).unwrap(), &MeanFieldOptions::default()).unwrap();
    assert_eq!(own.reference, Determinant::aufbau(3, 2));
}

fn random_t2(seed: u64, m: usize, n_occ: usize) -> T2Amplitudes {
    let mut r = rng(seed);
    let mut t2 = T2Amplitudes::zeros(m, n_occ);
    let nv = m - n_occ;
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in 0..nv {
                for b in 0..nv {
                    if (i, a) <= (j, b) {
                        let x = r.random_range(-0.3..0.3);
                        t2.set(i, j, a, b, x);
                        t2.set(j, i, b, a, x);
                    }
                }
            }
        }
    }
    t2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lucj_parameters_respect_structure(seed in any::<u64>(), m in 2usize..=6, layers in 1usize..=3, all in any::<bool>()) {
        let n_occ = (m / 2).max(1);
        let t2 = random_t2(seed, m, n_occ);
        let mask = if all { ConnectivityMask::all_to_all(m) } else { ConnectivityMask::local(m) };
        let p = lucj_from_t2(&t2, layers, &mask).unwrap();
        prop_assert_eq!(p.layers.len(), layers);
        prop_assert!(p.validate().is_ok());
        for layer in &p.layers {
            prop_assert_eq!(&layer.k, &(-layer.k.transpose()));
            prop_assert_eq!(&layer.j_same, &layer.j_same.transpose());
            prop_assert_eq!(&layer.j_opposite, &layer.j_opposite.transpose());
            for x in 0..m {
                for y in 0..m {
                    if !mask.opposite_spin[(x, y)] {
                        prop_assert_eq!(layer.j_opposite[(x, y)], 0.0);
                    }
                    if !mask.same_spin[(x, y)] {
                        prop_assert_eq!(layer.j_same[(x, y)], 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn zero_amplitudes_give_zero_parameters() {
    let p = lucj_from_t2(&T2Amplitudes::zeros(4, 2), 1, &ConnectivityMask::local(4)).unwrap();
    assert_eq!(p.layers.len(), 1);
    assert!(p.layers[0].k.iter().all(|x| *x == 0.0));
    assert!(p.layers[0].j_same.iter().all(|x| *x == 0.0));
    assert!(p.layers[0].j_opposite.iter().all(|x| *x == 0.0));
}
