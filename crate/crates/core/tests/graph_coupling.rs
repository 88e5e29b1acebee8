use std::sync::Arc;

use dcmrank::dcm::{
    build_coupled, build_graph, graph_ball_signature, tree_ball_signature, tree_generation_sizes, CouplingOptions,
};
use dcmrank::rng::{purpose, stream};
use dcmrank::seqgen::{DegreeModel, DegreeModelParams, ExtendedBiDegreeSequence};
use proptest::prelude::*;
use rayon::prelude::*;

fn reference_sequence(n: usize, seed: u64) -> Arc<ExtendedBiDegreeSequence> {
    let model = DegreeModel::new(DegreeModelParams::reference_default()).unwrap();
    Arc::new(model.run_iid_algorithm(n, &mut stream(seed, purpose::SEQUENCE, 0)).unwrap().sequence)
}

fn balanced_sequence() -> impl Strategy<Value = ExtendedBiDegreeSequence> {
    (1usize..12).prop_flat_map(|n| {
        (prop::collection::vec(0u64..4, n), prop::collection::vec(0u64..4, n)).prop_map(|(mut ins, outs)| {
            // Move the surplus onto node 0 so the stub counts match.
            let si: u64 = ins.iter().sum();
            let so: u64 = outs.iter().sum();
            let mut outs = outs;
            if si > so {
                outs[0] += si - so;
            } else {
                ins[0] += so - si;
            }
            ExtendedBiDegreeSequence::pagerank(ins, outs, 0.3).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn realized_degrees_equal_the_sequence(seq in balanced_sequence(), seed in any::<u64>()) {
        let seq = Arc::new(seq);
        let graph = build_graph(seq.clone(), &mut stream(seed, purpose::GRAPH, 0)).unwrap();
        let (ins, outs) = graph.realized_degrees();
        prop_assert_eq!(&ins[..], seq.in_degrees());
        prop_assert_eq!(&outs[..], seq.out_degrees());

        let coupled = build_coupled(seq.clone(), &CouplingOptions::new(3), &mut stream(seed, purpose::COUPLING, 0)).unwrap();
        let (ins, outs) = coupled.graph.realized_degrees();
        prop_assert_eq!(&ins[..], seq.in_degrees());
        prop_assert_eq!(&outs[..], seq.out_degrees());
    }

    #[test]
    fn balls_agree_before_the_coupling_breaks(seq in balanced_sequence(), seed in any::<u64>()) {
        let res = build_coupled(Arc::new(seq), &CouplingOptions::new(4), &mut stream(seed, purpose::COUPLING, 1)).unwrap();
        for r in 0..=4usize {
            if res.tau.exceeds(r as u32) {
                prop_assert_eq!(graph_ball_signature(&res.graph, res.root, r), tree_ball_signature(&res.tree, r));
            }
        }
    }
}

#[test]
fn first_explored_node_is_uniform() {
    let seq = reference_sequence(10, 21);
    let reps = 100_000u64;
    let mut counts = [0u64; 10];
    for i in 0..reps {
        let res = build_coupled(seq.clone(), &CouplingOptions::new(0), &mut stream(21, purpose::COUPLING, i)).unwrap();
        counts[res.root] += 1;
    }
    let se = (0.1 * 0.9 / reps as f64).sqrt();
    for (v, &c) in counts.iter().enumerate() {
        let f = c as f64 / reps as f64;
        assert!((f - 0.1).abs() < 3.0 * se, "node {v}: frequency {f}");
    }
}

#[test]
fn two_node_pairings_split_evenly_under_coupling() {
    let seq = Arc::new(ExtendedBiDegreeSequence::pagerank(vec![1, 1], vec![1, 1], 0.3).unwrap());
    let reps = 100_000u64;
    let loops = (0..reps)
        .filter(|&i| {
            let res =
                build_coupled(seq.clone(), &CouplingOptions::new(2), &mut stream(22, purpose::COUPLING, i)).unwrap();
            res.graph.in_neighbors(0) == [0]
        })
        .count();
    let f = loops as f64 / reps as f64;
    assert!((f - 0.5).abs() < 3.0 * (0.25 / reps as f64).sqrt(), "self-loop frequency {f}");
}

#[test]
fn generation_sizes_grow_geometrically() {
    let seq = reference_sequence(300, 23);
    let n = seq.len() as f64;
    let l = seq.total_stubs() as f64;
    let mu_star = l / n;
    let mu = seq.in_degrees().iter().zip(seq.out_degrees()).map(|(&a, &b)| (a * b) as f64).sum::<f64>() / l;
    let depth = 3;
    let reps = 10_000u64;
    let sizes: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let res =
                build_coupled(seq.clone(), &CouplingOptions::new(depth + 1), &mut stream(23, purpose::COUPLING, i))
                    .unwrap();
            tree_generation_sizes(&res.tree).0.iter().map(|&z| z as f64).collect()
        })
        .collect();
    for r in 0..=depth {
        let xs: Vec<f64> = sizes.iter().map(|s| s[r]).collect();
        let (mean, se) = dcmrank::stats::mean_and_se(&xs);
        let expected = mu_star * mu.powi(r as i32);
        assert!((mean - expected).abs() < 3.0 * se, "r={r}: mean {mean} vs {expected} (se {se})");
    }
}

/// `P(τ ≤ k)` over `reps` couplings spread across `sequences` sequences of size `n`.
fn early_break_rate(n: usize, k: u32, sequences: u64, reps: u64) -> f64 {
    let breaks: u64 = (0..sequences)
        .into_par_iter()
        .map(|s| {
            let seq = reference_sequence(n, 1000 + s);
            (0..reps)
                .filter(|&i| {
                    let res = build_coupled(
                        seq.clone(),
                        &CouplingOptions::new(k as usize + 1),
                        &mut stream(24 + s, purpose::COUPLING, i),
                    )
                    .unwrap();
                    !res.tau.exceeds(k)
                })
                .count() as u64
        })
        .sum();
    breaks as f64 / (sequences * reps) as f64
}

#[test]
fn coupling_breaks_later_in_larger_graphs() {
    let k = 3;
    let small = early_break_rate(1_000, k, 50, 200);
    let large = early_break_rate(100_000, k, 50, 200);
    let ratio = small / large;
    println!("P(tau <= {k}): n=1e3 {small:.5}, n=1e5 {large:.5}, ratio {ratio:.2}");
    assert!(small > large);
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}
