//! Property tests over seeds, states, and hyperparameters.

use gradient_td::agents::{td_update, vtrace_update};
use gradient_td::env::{mountain_car_tiles, tile_code, PredictionEnv, Transition};
use gradient_td::metrics::{aggregate, mspbe, mspbe_pp, RunResult};
use gradient_td::rng::CounterRng;
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn streams_respect_transition_invariants(seed in any::<u64>(), env_idx in 0usize..5) {
        let name = PredictionEnv::prediction_names()[env_idx];
        let env = PredictionEnv::by_name(name).unwrap();
        let mut stream = env.stream(CounterRng::keyed(&[seed]));
        for _ in 0..50 {
            let t = stream.next_transition();
            prop_assert!(t.check_invariants().is_ok());
            prop_assert!(t.rho >= 0.0);
            prop_assert!((0.0..=1.0).contains(&t.gamma_next));
        }
    }

    #[test]
    fn tile_coder_always_activates_one_tile_per_tiling(
        pos in -2.0f64..1.0,
        vel in -0.2f64..0.2,
        n_tilings in 1usize..12,
    ) {
        let cfg = mountain_car_tiles(n_tilings);
        let x = tile_code(&cfg, &[pos, vel]);
        let active = x.iter().filter(|&&v| v == 1.0).count();
        prop_assert_eq!(active, n_tilings);
        prop_assert_eq!(x.len(), cfg.n_features());
    }

    #[test]
    fn vtrace_equals_td_whenever_the_ratio_is_under_the_clip(
        rho in 0.0f64..1.0,
        reward in -5.0f64..5.0,
        gamma in 0.0f64..1.0,
    ) {
        let w = DVector::from_vec(vec![0.3, -0.8]);
        let t = Transition {
            x: DVector::from_vec(vec![1.0, 0.5]),
            action: 0,
            reward,
            x_next: DVector::from_vec(vec![0.2, 0.9]),
            rho,
            gamma_next: gamma,
        };
        let clipped = vtrace_update(&w, 1.0, &t);
        let plain = td_update(&w, &t);
        prop_assert_eq!(clipped, plain);
    }

    #[test]
    fn aggregate_is_permutation_invariant(perm_seed in any::<u64>()) {
        let runs: Vec<RunResult> = (0..6)
            .map(|i| {
                let alpha = if i % 2 == 0 { 0.25 } else { 0.5 };
                RunResult::new(
                    vec![0.1 * i as f64, 0.2], i as u64, alpha, 1.0, 0.0,
                    "constant".into(), false,
                )
            })
            .collect();
        let mut shuffled = runs.clone();
        let mut rng = CounterRng::keyed(&[perm_seed]);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.next_index(i + 1));
        }
        let a = aggregate(&runs).unwrap();
        let b = aggregate(&shuffled).unwrap();
        let best_a = a.best_stats();
        let best_b = b.best_stats();
        prop_assert_eq!(best_a.alpha, best_b.alpha);
        prop_assert_eq!(best_a.mean_auc, best_b.mean_auc);
        prop_assert_eq!(best_a.stderr_auc, best_b.stderr_auc);
        // Per-config stats agree regardless of encounter order.
        for stats in &a.per_config {
            let twin = b
                .per_config
                .iter()
                .find(|s| s.alpha == stats.alpha)
                .unwrap();
            prop_assert_eq!(twin.mean_auc, stats.mean_auc);
        }
    }

    #[test]
    fn regularized_objective_never_exceeds_the_plain_one(
        beta in 0.0f64..100.0,
        w0 in -2.0f64..2.0,
        w1 in -2.0f64..2.0,
        w2 in -2.0f64..2.0,
    ) {
        let env = PredictionEnv::by_name("randomwalk-dependent").unwrap();
        let w = DVector::from_vec(vec![w0, w1, w2]);
        prop_assert!(mspbe_pp(&w, &env.model, beta) <= mspbe(&w, &env.model) + 1e-10);
    }
}
