use std::sync::Arc;

use dcmrank::dcm::build_graph;
use dcmrank::rank::{power_iteration, residual_l1, solve_exact, RankingConfig};
use dcmrank::rng::{purpose, stream};
use dcmrank::seqgen::{DegreeModel, DegreeModelParams, ScalarLaw};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn model(c: f64, signed: bool) -> DegreeModel {
    let mut p = DegreeModelParams::pagerank(1.5, 2.5, 2.0, c);
    if signed {
        p.damping_law = ScalarLaw::Uniform { low: -c, high: c };
        p.personalization_law = ScalarLaw::Uniform { low: -1.0, high: 2.0 };
    }
    DegreeModel::new(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn relabeling_permutes_the_ranks(n in 1usize..=100, c in 0.05f64..0.95, signed in any::<bool>(), seed in any::<u64>()) {
        let m = model(c, signed);
        let seq = Arc::new(m.run_iid_algorithm(n, &mut stream(seed, purpose::SEQUENCE, 0)).unwrap().sequence);
        let graph = build_graph(seq.clone(), &mut stream(seed, purpose::GRAPH, 0)).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream(seed, purpose::AUX, 0));
        let relabeled = graph.permuted(&perm).unwrap();
        let config = RankingConfig::new(c);
        let r = power_iteration(&graph, seq.personalization(), &config).unwrap();
        let rp = power_iteration(&relabeled, relabeled.sequence().personalization(), &config).unwrap();
        prop_assert_eq!(r.iterations, rp.iterations);
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(rp.values[i].to_bits(), r.values[p].to_bits());
        }
    }

    #[test]
    fn converged_iterates_satisfy_the_residual_bound(n in 1usize..2000, c in 0.05f64..0.95, signed in any::<bool>(), seed in any::<u64>()) {
        let m = model(c, signed);
        let seq = Arc::new(m.run_iid_algorithm(n, &mut stream(seed, purpose::SEQUENCE, 1)).unwrap().sequence);
        let graph = build_graph(seq.clone(), &mut stream(seed, purpose::GRAPH, 1)).unwrap();
        let config = RankingConfig { max_k: 10_000, ..RankingConfig::new(c) };
        let r = power_iteration(&graph, seq.personalization(), &config).unwrap();
        prop_assert!(r.last_step_l2 < config.tolerance);
        let bound = config.tolerance * (n as f64).sqrt() * (1.0 + c) / (1.0 - c);
        let residual = residual_l1(&graph, &r.values, seq.personalization()).unwrap();
        prop_assert!(residual <= bound, "residual {} > {}", residual, bound);
    }
}

#[test]
fn scaled_pagerank_averages_to_one() {
    // Zeta+Poisson out-degrees are at least one, so no node is dangling.
    for seed in 0..20u64 {
        let m = model(0.3, false);
        let seq = Arc::new(m.run_iid_algorithm(2000, &mut stream(seed, purpose::SEQUENCE, 2)).unwrap().sequence);
        assert!(seq.out_degrees().iter().all(|&d| d > 0));
        let graph = build_graph(seq.clone(), &mut stream(seed, purpose::GRAPH, 2)).unwrap();
        let r = power_iteration(&graph, seq.personalization(), &RankingConfig::new(0.3)).unwrap();
        let mean = r.values.iter().sum::<f64>() / r.values.len() as f64;
        assert!((mean - 1.0).abs() < 1e-8, "seed {seed}: mean rank {mean}");
    }
}

#[test]
fn truncated_iteration_stays_within_the_certified_bound() {
    // The bound controls the mean absolute error after exactly k steps.
    for seed in 0..100u64 {
        let c = [0.3, 0.6, 0.9][seed as usize % 3];
        let m = model(c, seed % 2 == 0);
        let seq = Arc::new(m.run_iid_algorithm(300, &mut stream(seed, purpose::SEQUENCE, 3)).unwrap().sequence);
        let graph = build_graph(seq.clone(), &mut stream(seed, purpose::GRAPH, 3)).unwrap();
        let exact = solve_exact(&graph, seq.personalization()).unwrap().values;
        for max_k in [1, 3, 8, 200] {
            let config = RankingConfig { max_k, ..RankingConfig::new(c) };
            let r = power_iteration(&graph, seq.personalization(), &config).unwrap();
            let mean_gap = r.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / 300.0;
            assert!(
                mean_gap <= 2.0 * r.certified_error_bound,
                "seed {seed}, k {}: gap {mean_gap} vs bound {}",
                r.iterations,
                r.certified_error_bound
            );
        }
    }
}
