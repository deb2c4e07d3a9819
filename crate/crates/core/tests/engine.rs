mod common;

use grub_core::engine::{grub_run, zeta_grub_run, RunConfig, Termination};
use grub_core::simgen::{generate_graph, BanditInstance, GraphSpec};
use grub_core::{ConfidenceParams, PolicyKind, SimilarityGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(sigma: f64, delta: f64, n: usize, rho: f64) -> RunConfig {
    RunConfig::new(ConfidenceParams::new(sigma, delta, 0.0, n).unwrap(), rho)
}

/// Isolated optimum (100), one 9-clique (40), nine 10-cliques (10).
fn config_one() -> (SimilarityGraph, Vec<f64>) {
    let mut sizes = vec![9];
    sizes.extend([10; 9]);
    let g = generate_graph(
        &GraphSpec::CompleteClusters {
            sizes,
            isolated_optimal: true,
        },
        0,
    )
    .unwrap();
    let mut mu = vec![10.0; 100];
    mu[0] = 100.0;
    mu[1..10].fill(40.0);
    (g, mu)
}

#[test]
fn single_arm_wins_after_init() {
    let g = SimilarityGraph::edgeless(1);
    let inst = BanditInstance::new(&g, vec![0.3], 1.0).unwrap();
    let t = grub_run(&g, &config(1.0, 0.1, 1, 1.0), &mut inst.rewards(0)).unwrap();
    assert_eq!(t.winner, 0);
    assert_eq!(t.total_pulls, 1);
    assert_eq!(t.terminated_by, Termination::Singleton);
}

#[test]
fn near_noiseless_pair_resolves_quickly() {
    let g = SimilarityGraph::edgeless(2);
    let inst = BanditInstance::new(&g, vec![10.0, 0.0], 0.01).unwrap();
    let quick = (0..100)
        .filter(|&seed| {
            let cfg = config(0.01, 0.05, 2, 1.0).with_seed(seed);
            let t = grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
            t.winner == 0 && t.total_pulls <= 6
        })
        .count();
    assert!(quick >= 99, "{quick}/100");
}

#[test]
fn init_pulls_one_arm_per_component() {
    let (g, mu) = config_one();
    let inst = BanditInstance::new(&g, mu, 1.0).unwrap();
    let cfg = config(1.0, 0.001, 100, 5.0);
    let t = grub_run(&g, &cfg, &mut inst.rewards(3)).unwrap();
    let init: Vec<usize> = t.steps[..11].iter().map(|s| s.arm).collect();
    assert_eq!(init, vec![0, 1, 10, 20, 30, 40, 50, 60, 70, 80, 90]);
}

#[test]
fn whole_clusters_fall_without_individual_samples() {
    let (g, mu) = config_one();
    let inst = BanditInstance::new(&g, mu, 1.0).unwrap();
    let cfg = config(1.0, 0.001, 100, 5.0);
    for seed in 0..5 {
        let t = grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
        assert_eq!(t.winner, 0);
        let sampled: std::collections::BTreeSet<usize> = t.steps.iter().map(|s| s.arm).collect();
        // Most arms were eliminated without ever being pulled.
        assert!(sampled.len() < 20, "{sampled:?}");
        let eliminated: usize = t.steps.iter().map(|s| s.eliminated.len()).sum();
        assert_eq!(eliminated, 99);
    }
}

#[test]
fn graph_beats_the_edgeless_baseline() {
    let (g, mu) = config_one();
    let empty = SimilarityGraph::edgeless(100);
    let inst = BanditInstance::new(&g, mu, 1.0).unwrap();
    let cfg = config(1.0, 0.001, 100, 5.0).with_max_steps(100_000);
    for seed in 0..5 {
        let with = grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
        let without = grub_run(&empty, &cfg, &mut inst.rewards(seed)).unwrap();
        assert!(with.total_pulls < without.total_pulls);
        assert!(without.total_pulls >= 100);
    }
}

#[test]
fn large_zeta_stops_right_after_init() {
    let g = SimilarityGraph::complete(5);
    let inst = BanditInstance::new(&g, vec![1.0, 0.9, 0.8, 0.7, 0.6], 1.0).unwrap();
    let cfg = config(1.0, 0.1, 5, 1.0).with_zeta(1e6);
    let t = zeta_grub_run(&g, &cfg, &mut inst.rewards(0)).unwrap();
    assert_eq!(t.terminated_by, Termination::Zeta);
    assert_eq!(t.total_pulls, 1);
}

#[test]
fn zero_zeta_matches_exact_mode() {
    let g = SimilarityGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    let inst = BanditInstance::new(&g, vec![3.0, 2.9, 0.0, 0.1], 0.2).unwrap();
    let exact = config(0.2, 0.1, 4, 1.0).with_max_steps(1_000_000);
    let a = grub_run(&g, &exact, &mut inst.rewards(9)).unwrap();
    let b = zeta_grub_run(&g, &exact.clone().with_zeta(0.0), &mut inst.rewards(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mode_mismatch_is_rejected() {
    let g = SimilarityGraph::complete(2);
    let inst = BanditInstance::new(&g, vec![1.0, 0.0], 1.0).unwrap();
    let cfg = config(1.0, 0.1, 2, 1.0);
    assert!(zeta_grub_run(&g, &cfg, &mut inst.rewards(0)).is_err());
    assert!(grub_run(&g, &cfg.clone().with_zeta(0.5), &mut inst.rewards(0)).is_err());
    assert!(grub_run(&g, &cfg.clone().with_max_steps(1), &mut inst.rewards(0)).is_err());
    let wrong_n = config(1.0, 0.1, 3, 1.0);
    assert!(grub_run(&g, &wrong_n, &mut inst.rewards(0)).is_err());
}

#[test]
fn zeta_best_on_near_ties() {
    // Two near-optimal arms in one clique, gap below ζ, plus a far cluster.
    let g = SimilarityGraph::from_edges(
        6,
        &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)],
    )
    .unwrap();
    let mu = vec![1.0, 1.0 - 0.05, 0.6, -2.0, -2.0, -2.0];
    let inst = BanditInstance::new(&g, mu.clone(), 0.25).unwrap();
    let zeta = 0.2;
    let params = ConfidenceParams::new(0.25, 0.05, inst.epsilon_certificate, 6).unwrap();
    let good = (0..500u64)
        .filter(|&seed| {
            let cfg = RunConfig::new(params, 1.0)
                .with_zeta(zeta)
                .with_seed(seed)
                .with_max_steps(1_000_000);
            let t = zeta_grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
            assert_ne!(t.terminated_by, Termination::Cap);
            mu[t.winner] >= 1.0 - zeta
        })
        .count();
    assert!(good >= 475, "{good}/500");
}

#[test]
fn cap_is_a_flagged_outcome() {
    let g = SimilarityGraph::edgeless(3);
    let inst = BanditInstance::new(&g, vec![0.0, 0.01, 0.02], 1.0).unwrap();
    let cfg = config(1.0, 0.1, 3, 1.0).with_max_steps(30);
    let t = grub_run(&g, &cfg, &mut inst.rewards(0)).unwrap();
    assert_eq!(t.terminated_by, Termination::Cap);
    assert_eq!(t.total_pulls, 30);
    assert!(t.final_active.contains(&t.winner));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_are_consistent_and_deterministic(seed in any::<u64>(), policy_ix in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0.0..0.6);
        let g = common::random_graph(&mut rng, n, p);
        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let inst = BanditInstance::new(&g, mu, 0.5).unwrap();
        let params = ConfidenceParams::new(0.5, 0.1, inst.epsilon_certificate, n).unwrap();
        let cfg = RunConfig::new(params, 1.0)
            .with_policy(PolicyKind::ALL[policy_ix])
            .with_seed(seed)
            .with_max_steps(2000);
        let a = grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
        let b = grub_run(&g, &cfg, &mut inst.rewards(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.steps.len() as u64, a.total_pulls);
        prop_assert!(a.final_active.contains(&a.winner));
        let curve = a.active_curve();
        prop_assert!(curve.windows(2).all(|w| w[1] <= w[0]));
        let mut gone = std::collections::BTreeSet::new();
        for s in &a.steps {
            prop_assert!(!gone.contains(&s.arm), "eliminated arm {} was pulled", s.arm);
            gone.extend(s.eliminated.iter().copied());
        }
        prop_assert_eq!(gone.len() + a.final_active.len(), n);
    }
}
