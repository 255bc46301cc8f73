use modal_lab::channels::random_channel_with_rng;
use modal_lab::hilbert::linalg::c;
use modal_lab::hilbert::random::{random_density_matrix_with_rng, rng_from_seed};
use modal_lab::hilbert::{spectral_decompose, Partition};
use modal_lab::modal::{
    dynamical_cond_probs_from_state, eigenstate_swap_analysis, general_cond_probs_from_state, leifer_spekkens_check,
    propagate_epistemic, sample_trajectories, SwapBlockModel,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tables_are_normalized_and_marginalize(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let w = Partition::new([("A", da), ("B", db)]).unwrap();
        let rho = random_density_matrix_with_rng(w.clone(), w.total_dim(), &mut rng).unwrap();
        let ch = random_channel_with_rng(w.clone(), w, 2, &mut rng).unwrap();
        let table = general_cond_probs_from_state(&ch, &rho, &[&["A"], &["B"]]).unwrap();
        prop_assert!(table.min_raw_entry() >= -1e-12);
        prop_assert!(table.normalization_residual() <= 1e-10);
        let weights = spectral_decompose(&rho).probabilities().to_vec();
        let evolved = ch.apply(&rho).unwrap();
        for (axis, label) in ["A", "B"].iter().enumerate() {
            let sub = spectral_decompose(&modal_lab::hilbert::partial_trace(&evolved, &[label]).unwrap());
            let m = table.weighted_marginal(axis, &weights);
            for (x, y) in m.iter().zip(sub.probabilities()) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn propagation_stays_in_simplex(dim in 2usize..=4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let s = Partition::single("S", dim);
        let rho = random_density_matrix_with_rng(s.clone(), dim, &mut rng).unwrap();
        let ch = random_channel_with_rng(s.clone(), s, 3, &mut rng).unwrap();
        let epi = spectral_decompose(&rho);
        let (p, next) = dynamical_cond_probs_from_state(&ch, &epi).unwrap();
        let out = propagate_epistemic(epi.probabilities(), &p).unwrap();
        prop_assert!(out.iter().all(|&x| x >= 0.0));
        prop_assert!((out.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        for (x, y) in out.iter().zip(next.probabilities()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        prop_assert!(leifer_spekkens_check(&ch, &epi, &next).unwrap() <= 1e-10);
    }

    #[test]
    fn trajectories_start_from_the_initial_distribution(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let s = Partition::single("S", 2);
        let rho = random_density_matrix_with_rng(s.clone(), 2, &mut rng).unwrap();
        let ch = random_channel_with_rng(s.clone(), s, 2, &mut rng).unwrap();
        let epi = spectral_decompose(&rho);
        let (p, _) = dynamical_cond_probs_from_state(&ch, &epi).unwrap();
        let ens = sample_trajectories(&[p], epi.probabilities(), 4000, seed).unwrap();
        let p0 = epi.probabilities()[0];
        let se = (p0 * (1.0 - p0) / 4000.0).sqrt().max(1e-12);
        prop_assert!((ens.occupation[0][0] - p0).abs() <= 6.0 * se);
        prop_assert!(ens.trajectories.iter().all(|t| t.indices.len() == 2));
    }

    #[test]
    fn swaps_are_followed_by_state(rho0 in 0.1f64..0.9, xi in 1e-5f64..1e-3, tau in 0.1f64..10.0) {
        let model = SwapBlockModel::new(rho0, c(xi, 0.0), tau, 0.0).unwrap();
        let rep = eigenstate_swap_analysis(&model, &[0.0]).unwrap();
        prop_assert!(rep.label_following <= 0.05);
        prop_assert!(rep.state_following >= 0.95);
        prop_assert!((rep.gap_at_t0 - rep.analytic_gap_at_t0).abs() <= 1e-12);
    }
}
