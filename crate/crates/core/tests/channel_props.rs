use modal_lab::channels::{
    choi, conditional_state, dephasing, depolarizing, kraus_from_choi, random_channel, verify_cpt, LindbladGenerator,
};
use modal_lab::hilbert::linalg::{self, r};
use modal_lab::hilbert::random::{random_density_matrix_on, random_hermitian, rng_from_seed};
use modal_lab::hilbert::Partition;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_channels_are_cpt(dim in 1usize..=4, n in 1usize..=4, seed in any::<u64>()) {
        let ch = random_channel(Partition::single("S", dim), n, seed).unwrap();
        let d = verify_cpt(&ch);
        prop_assert!(d.tp_residual <= 1e-9);
        prop_assert!(d.choi_min_eigenvalue >= -1e-9);
        prop_assert!(d.trace_preserving && d.completely_positive);
    }

    #[test]
    fn choi_round_trip_preserves_action(dim in 1usize..=3, n in 1usize..=3, seed in any::<u64>()) {
        let s = Partition::single("S", dim);
        let ch = random_channel(s.clone(), n, seed).unwrap();
        let back = kraus_from_choi(&choi(&ch)).unwrap();
        let rho = random_density_matrix_on(s, dim, seed ^ 1).unwrap();
        prop_assert!(linalg::max_abs_diff(&back.apply_matrix(rho.entries()), &ch.apply_matrix(rho.entries())) <= 1e-10);
        let cs = conditional_state(&ch);
        prop_assert!(linalg::max_abs_diff(&cs.propagate(rho.entries()), &ch.apply_matrix(rho.entries())) <= 1e-10);
    }

    #[test]
    fn outputs_stay_positive(p in 0.0f64..=1.0, lambda in 0.0f64..=1.0, seed in any::<u64>()) {
        let s = Partition::single("S", 3);
        let rho = random_density_matrix_on(s.clone(), 2, seed).unwrap();
        for ch in [depolarizing(p, s.clone()).unwrap(), dephasing(lambda, s.clone()).unwrap()] {
            let out = ch.apply(&rho).unwrap();
            prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
            prop_assert!(linalg::min_eigenvalue(out.entries()) >= -1e-9);
        }
    }

    #[test]
    fn dephasing_generator_has_closed_form(gamma in 0.2f64..2.0, seed in any::<u64>()) {
        let q = Partition::single("Q", 2);
        let rho = random_density_matrix_on(q.clone(), 2, seed).unwrap();
        let gen = LindbladGenerator::new(linalg::identity(2) * r(0.0), vec![linalg::pauli_z()], vec![gamma], q).unwrap();
        let t = 1.0 / gamma;
        let out = gen.evolve(&rho, t, 1e-3).unwrap();
        let expected = rho.entries()[(0, 1)] * (-2.0 * gamma * t).exp();
        prop_assert!((out.entries()[(0, 1)] - expected).norm() <= 1e-6);
        prop_assert!((out.entries()[(0, 0)] - rho.entries()[(0, 0)]).norm() <= 1e-10);
    }

    #[test]
    fn lindblad_preserves_trace(dim in 2usize..=3, seed in any::<u64>()) {
        let s = Partition::single("S", dim);
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(dim, &mut rng);
        let a = random_hermitian(dim, &mut rng);
        let rho = random_density_matrix_on(s.clone(), dim, seed).unwrap();
        let out = LindbladGenerator::new(h, vec![a], vec![0.3], s).unwrap().evolve(&rho, 0.5, 1e-3).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-8);
    }
}
