#![allow(dead_code)]

use polopt::graph::{pair_count, pairs};
use polopt::{EdgeWeightVector, OpinionVector, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph: each pair present with probability `density`, weight in (0.05, 3).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for (u, v) in pairs(n) {
        if rng.gen::<f64>() < density {
            edges.push((u, v, rng.gen_range(0.05..3.0)));
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

pub fn random_opinions(rng: &mut ChaCha8Rng, n: usize) -> OpinionVector {
    OpinionVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

/// Feasible point of the scaled simplex with every entry at least `floor`.
pub fn random_feasible(rng: &mut ChaCha8Rng, n: usize, total: f64, floor: f64) -> EdgeWeightVector {
    let count = pair_count(n);
    let raw: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    let spare = total - floor * count as f64;
    assert!(spare > 0.0);
    EdgeWeightVector::new(n, raw.iter().map(|x| floor + spare * x / sum).collect()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
