use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use ontic::bell::{self, counterfactual_shift, mousedrop_density, Method, MousedropModel};
use ontic::conservation::check_ontology_conservation;
use ontic::evolution::{cogwheel, extract_hamiltonian, spectrum, Branch, TimeStep, UnitaryMatrix};
use ontic::linalg::max_abs_diff;
use ontic::operators::{commutator_norm, diagonal_observables, heisenberg, is_beable_set, Observable};
use ontic::random::{random_generalized_permutation, random_permutation, random_state, substream};
use ontic::state::{StateVector, DEFAULT_CLASSIFY_TOL};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn accepted_states_are_unit_norm(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40), scale in 0.9999995f64..1.0000005) {
        let raw: Vec<Complex64> = values.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let near: Vec<Complex64> = raw.iter().map(|z| z * (scale / norm)).collect();
        let s = StateVector::new(near).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn phased_basis_states_are_ontological(dim in 1usize..64, k in 0usize..64, theta in -10.0f64..10.0) {
        let k = k % dim;
        let s = StateVector::basis(dim, k).unwrap().with_global_phase(theta);
        let class = s.classify(DEFAULT_CLASSIFY_TOL).unwrap();
        prop_assert!(class.is_ontological());
    }

    #[test]
    fn two_large_amplitudes_are_superposed(w in 0.01f64..0.99, dim in 2usize..16) {
        let mut v = vec![0.0; dim];
        v[0] = w.sqrt();
        v[dim - 1] = (1.0 - w).sqrt();
        let s = StateVector::from_real(&v).unwrap();
        prop_assert!(!s.classify(DEFAULT_CLASSIFY_TOL).unwrap().is_ontological());
    }

    #[test]
    fn sorted_probabilities_are_squared_sorted_moduli(seed: u64, dim in 1usize..64) {
        let s = random_state(dim, &mut substream(seed, 0)).unwrap();
        let moduli = s.amplitude_multiset();
        let probs = s.probability_multiset();
        for (m, p) in moduli.iter().zip(&probs) {
            prop_assert!((m * m - p).abs() <= 1e-15);
        }
    }

    #[test]
    fn evolution_preserves_norm(seed: u64, dim in 1usize..128, steps in 0u64..500) {
        let mut rng = substream(seed, 0);
        let pure = random_permutation(dim, &mut rng).unwrap();
        let phased = random_generalized_permutation(dim, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng).unwrap();
        let a = pure.evolve(&psi, steps).unwrap();
        // a shuffle moves the same numbers around, so compare them bitwise
        prop_assert_eq!(a.probability_multiset(), psi.probability_multiset());
        prop_assert!((a.norm_sqr() - psi.norm_sqr()).abs() <= 1e-14);
        let b = phased.evolve(&psi, steps).unwrap();
        prop_assert!((b.norm_sqr() - psi.norm_sqr()).abs() <= 1e-13);
    }

    #[test]
    fn period_returns_state(seed: u64, dim in 1usize..=256) {
        let mut rng = substream(seed, 0);
        let p = random_permutation(dim, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng).unwrap();
        let period = p.period().unwrap();
        prop_assume!(period <= 1_000_000);
        let back = p.evolve(&psi, period as u64).unwrap();
        let dev = psi.amplitudes().iter().zip(back.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-12);
    }

    #[test]
    fn born_weights_follow_the_permutation(seed: u64, dim in 1usize..64, steps in 0u64..1000) {
        let mut rng = substream(seed, 0);
        let p = random_generalized_permutation(dim, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng).unwrap();
        let fin = p.evolve(&psi, steps).unwrap().born_probabilities();
        let init = psi.born_probabilities();
        for (i, w) in init.iter().enumerate() {
            prop_assert!((fin[p.orbit_position(i, steps)] - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn moduli_multiset_is_conserved(seed: u64, dim in 1usize..64, steps in 0u64..=1000) {
        let mut rng = substream(seed, 0);
        let p = random_generalized_permutation(dim, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng).unwrap();
        let report = check_ontology_conservation(&p, &psi, steps, 1e-12).unwrap();
        prop_assert!(report.verdict.is_pass(), "{}", report.max_multiset_deviation);
        let e = StateVector::basis(dim, (seed as usize) % dim).unwrap();
        let report = check_ontology_conservation(&p, &e, steps, 1e-12).unwrap();
        prop_assert!(report.final_class.is_ontological());
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn hamiltonian_round_trip(seed: u64, dim in 1usize..=32, dt in 0.1f64..3.0, wide: bool) {
        let p = random_generalized_permutation(dim, &mut substream(seed, 0)).unwrap();
        let u = UnitaryMatrix::from_permutation(&p);
        let branch = if wide { Branch::MinusPiToPi } else { Branch::ZeroToTwoPi };
        let h = extract_hamiltonian(&u, TimeStep::new(dt).unwrap(), branch).unwrap();
        prop_assert!(max_abs_diff(&h.evolution_operator(), u.matrix()) <= 1e-9);
    }

    #[test]
    fn cogwheel_spectrum_is_roots_of_unity(n in 2usize..=64) {
        let u = UnitaryMatrix::from_permutation(&cogwheel(n).unwrap());
        let phases = spectrum(&u, Branch::ZeroToTwoPi).unwrap().sorted_phases();
        for (k, p) in phases.iter().enumerate() {
            prop_assert!((p - TAU * k as f64 / n as f64).abs() <= 1e-9);
        }
    }

    #[test]
    fn heisenberg_is_additive_in_time(seed: u64, sites in 2usize..=5, s in -6i64..6, t in -6i64..6) {
        let mut rng = substream(seed, 0);
        let p = random_generalized_permutation(1 << sites, &mut rng).unwrap();
        let u = UnitaryMatrix::from_permutation(&p);
        let a = Observable::pauli_x(sites, (seed as usize) % sites).unwrap();
        let direct = heisenberg(&a, &u, s + t).unwrap();
        let nested = heisenberg(&heisenberg(&a, &u, s).unwrap(), &u, t).unwrap();
        prop_assert!(max_abs_diff(direct.matrix(), nested.matrix()) <= 1e-10);
    }

    #[test]
    fn commutator_symmetric_and_conjugation_invariant(seed: u64, sites in 2usize..=5, t in -4i64..4) {
        let mut rng = substream(seed, 0);
        let u = UnitaryMatrix::from_permutation(&random_generalized_permutation(1 << sites, &mut rng).unwrap());
        let a = Observable::pauli_x(sites, 0).unwrap();
        let b = Observable::pauli_z(sites, sites - 1).unwrap();
        let ab = commutator_norm(&a, &b).unwrap();
        prop_assert_eq!(ab, commutator_norm(&b, &a).unwrap());
        let at = heisenberg(&a, &u, t).unwrap();
        let bt = heisenberg(&b, &u, t).unwrap();
        prop_assert!((commutator_norm(&at, &bt).unwrap() - ab).abs() <= 1e-12);
    }

    #[test]
    fn diagonal_observables_are_beables(seed: u64, dim in 1usize..=16, horizon in 0u64..20) {
        let p = random_permutation(dim, &mut substream(seed, 0)).unwrap();
        let u = UnitaryMatrix::from_permutation(&p);
        prop_assert!(is_beable_set(&diagonal_observables(dim), &u, horizon, 1e-12).unwrap().is_pass());
    }

    #[test]
    fn mousedrop_normalized_and_sum_invariant(a in -10.0f64..10.0, b in -10.0f64..10.0, c in 0.0f64..PI) {
        let m = MousedropModel::default();
        prop_assert!((m.mass(a, b, 64).value - 1.0).abs() <= 1e-9);
        prop_assert_eq!(mousedrop_density(a, b, c), mousedrop_density(b, a, c));
    }

    #[test]
    fn aligned_and_crossed_correlations(a in -4.0f64..4.0) {
        let m = Method::Quadrature { panels: 32 };
        prop_assert!((bell::correlation(a, a, m, 0).unwrap().value - 1.0).abs() <= 1e-9);
        prop_assert!((bell::correlation(a, a + FRAC_PI_2, m, 0).unwrap().value + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn counterfactual_shift_zero_iff_same_sum(a in 0.0f64..PI, b in 0.0f64..PI, d in 0.01f64..(PI / 2.0 - 0.01)) {
        prop_assert_eq!(counterfactual_shift(a, b, a, b), 0.0);
        prop_assert!(counterfactual_shift(a, b, a, b + d) > 0.0);
    }

    #[test]
    fn estimates_are_deterministic(seed: u64) {
        let m = Method::MonteCarlo { samples: 5000 };
        prop_assert_eq!(bell::correlation(0.1, 0.5, m, seed).unwrap(), bell::correlation(0.1, 0.5, m, seed).unwrap());
        let e = bell::correlation(0.1, 0.5, m, seed).unwrap();
        prop_assert!(e.value.abs() <= 1.0 + 3.0 * e.std_error);
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature_in_most_runs() {
    let (a, b) = (0.0, PI / 8.0);
    let exact = bell::correlation(a, b, Method::Quadrature { panels: 512 }, 0).unwrap().value;
    let within = (0..100)
        .filter(|&seed| {
            let e = bell::correlation(a, b, Method::MonteCarlo { samples: 20_000 }, seed).unwrap();
            (e.value - exact).abs() <= 3.0 * e.std_error
        })
        .count();
    assert!(within >= 99, "{within}/100");
}
