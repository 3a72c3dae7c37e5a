use std::collections::HashMap;

use keygraph_core::graph::Graph;
use keygraph_core::model::{edge_probability, DiskParams, KeyParams, ModelParams};
use keygraph_core::rng::RngStream;
use keygraph_core::sampling::{
    key_graph, sample_er, sample_kg_intersection, sample_kh_intersection, sample_key_rings,
    sample_rgg_torus, sample_subset, torus_disk_graph, Positions,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn rng(seed: u64) -> ChaCha8Rng {
    RngStream::new(seed, 0).rng()
}

fn key(k: u32, p: u32) -> KeyParams {
    KeyParams::new(k, p).unwrap()
}

/// Asserts that `hits / trials` is within `sigmas` binomial deviations of `p`.
fn assert_frequency(hits: u64, trials: u64, p: f64, sigmas: f64, what: &str) {
    let freq = hits as f64 / trials as f64;
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    assert!(
        (freq - p).abs() <= sigmas * sd,
        "{what}: frequency {freq} vs {p} (sd {sd})"
    );
}

#[test]
fn rings_are_uniform_over_subsets() {
    let mut r = rng(1);
    let trials = 100_000u64;
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for _ in 0..trials {
        *counts.entry(sample_subset(key(2, 5), &mut r)).or_default() += 1;
    }
    assert_eq!(counts.len(), 10);
    let expected = trials as f64 / 10.0;
    let stat: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new(9.0).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn ring_pair_intersection_frequency_matches_q() {
    let mut r = rng(2);
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| {
            let a = sample_subset(key(2, 4), &mut r);
            let b = sample_subset(key(2, 4), &mut r);
            a.iter().any(|x| b.contains(x))
        })
        .count() as u64;
    // q = C(2,2)/C(4,2) = 1/6.
    assert_frequency(hits, trials, 5.0 / 6.0, 3.0, "K=2 P=4");

    let hits = (0..trials)
        .filter(|_| sample_subset(key(1, 2), &mut r) == sample_subset(key(1, 2), &mut r))
        .count() as u64;
    assert_frequency(hits, trials, 0.5, 3.0, "K=1 P=2");
}

#[test]
fn rings_are_sorted_distinct_and_in_range() {
    let mut r = rng(3);
    for (k, p) in [(1, 1), (3, 3), (5, 9), (40, 10_000), (100, 150)] {
        let a = sample_key_rings(50, key(k, p), &mut r);
        for ring in a.rings() {
            assert_eq!(ring.len(), k as usize);
            assert!(ring.windows(2).all(|w| w[0] < w[1]));
            assert!(ring.iter().all(|&x| x < p));
        }
    }
}

#[test]
fn key_graph_follows_set_intersection() {
    let mut r = rng(4);
    let a = sample_key_rings(80, key(6, 200), &mut r);
    let g = key_graph(&a);
    for i in 0..80 {
        for j in 0..80 {
            let shared = a.ring(i).iter().any(|x| a.ring(j).contains(x));
            assert_eq!(g.has_edge(i, j), i != j && shared, "({i}, {j})");
        }
    }
}

#[test]
fn er_pair_frequency() {
    let trials = 100_000u64;
    for alpha in [0.01, 0.25, 0.7] {
        let mut r = rng(5);
        let hits = (0..trials)
            .filter(|_| sample_er(2, alpha, &mut r).unwrap().has_edge(0, 1))
            .count() as u64;
        assert_frequency(hits, trials, alpha, 4.0, &format!("alpha={alpha}"));
    }
}

#[test]
fn er_edge_count_in_larger_graphs() {
    for (n, alpha) in [(300, 0.02), (300, 0.6), (5000, 0.001)] {
        let mut r = rng(6);
        let g = sample_er(n, alpha, &mut r).unwrap();
        let slots = (n * (n - 1) / 2) as u64;
        assert_frequency(g.edge_count() as u64, slots, alpha, 5.0, &format!("n={n}"));
    }
}

#[test]
fn rgg_pair_frequency_is_disk_area() {
    let mut r = rng(7);
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| sample_rgg_torus(2, 0.3, &mut r).unwrap().1.has_edge(0, 1))
        .count() as u64;
    assert_frequency(hits, trials, std::f64::consts::PI * 0.09, 4.0, "rho=0.3");
}

#[test]
fn kg_intersection_pair_frequency() {
    // K=1, P=2, alpha=1/2: link iff same key and channel on, 1/4.
    let params = ModelParams::new(key(1, 2), 0.5).unwrap();
    let mut r = rng(8);
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| sample_kg_intersection(2, params, &mut r).unwrap().has_edge(0, 1))
        .count() as u64;
    assert_frequency(hits, trials, 0.25, 4.0, "K=1 P=2 alpha=1/2");
}

#[test]
fn kg_intersection_edge_marginal() {
    let params = ModelParams::new(key(2, 10), 0.5).unwrap();
    let p = edge_probability(params).value();
    let mut r = rng(9);
    let trials = 10_000u64;
    let hits = (0..trials)
        .filter(|_| sample_kg_intersection(5, params, &mut r).unwrap().has_edge(1, 3))
        .count() as u64;
    assert_frequency(hits, trials, p, 4.0, "K=2 P=10 alpha=1/2");
}

#[test]
fn kh_intersection_pair_frequency() {
    let disk = DiskParams::new(key(2, 4), 0.25).unwrap();
    let p = 5.0 / 6.0 * disk.matched_alpha();
    let mut r = rng(10);
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| sample_kh_intersection(2, disk, &mut r).unwrap().has_edge(0, 1))
        .count() as u64;
    assert_frequency(hits, trials, p, 4.0, "disk K=2 P=4");
}

#[test]
fn same_stream_same_graph() {
    let params = ModelParams::new(key(8, 1000), 0.4).unwrap();
    let stream = RngStream::for_trial(99, 3, 17);
    let a = sample_kg_intersection(200, params, &mut stream.rng()).unwrap();
    let b = sample_kg_intersection(200, params, &mut stream.rng()).unwrap();
    assert_eq!(a, b);
    let c = sample_kg_intersection(200, params, &mut RngStream::for_trial(99, 3, 18).rng()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn torus_graph_commutes_with_relabeling() {
    let mut r = rng(11);
    let n = 120;
    let pos = Positions::sample(n, &mut r);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    let mut moved = vec![[0.0; 2]; n];
    for (v, &p) in perm.iter().enumerate() {
        moved[p] = pos.points()[v];
    }
    let g = torus_disk_graph(&pos, 0.15).unwrap();
    let h = torus_disk_graph(&Positions::new(moved).unwrap(), 0.15).unwrap();
    assert_eq!(g.relabel(&perm).unwrap(), h);
}

#[test]
fn intersections_are_subgraphs_of_both_factors() {
    let mut r = rng(12);
    let a = sample_key_rings(100, key(3, 60), &mut r);
    let keys = key_graph(&a);
    let channel = sample_er(100, 0.5, &mut r).unwrap();
    let both = keys.intersect(&channel).unwrap();
    let sub = |g: &Graph, h: &Graph| g.edges().iter().all(|&(i, j)| h.has_edge(i, j));
    assert!(sub(&both, &keys) && sub(&both, &channel));
    assert_eq!(
        both.edge_count(),
        keys.edges().iter().filter(|&&(i, j)| channel.has_edge(i, j)).count()
    );
}
