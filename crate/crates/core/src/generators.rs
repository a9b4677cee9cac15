//! Seeded synthetic instances: Erdős–Rényi and Norros-Reittu graphs, and
//! uniform, power-law, and degree-proportional opinions. Every generator is
//! a pure function of its parameters and seed; all edge weights are 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};
use crate::graph::{pairs, Edge, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn unit_graph(n: usize, edges: Vec<(usize, usize)>) -> WeightedGraph {
    WeightedGraph::new(n, edges.into_iter().map(|(u, v)| (u, v, 1.0))).expect("generated edges are valid")
}

pub fn erdos_renyi(n: usize, p: f64, seed: Seed) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = seed.rng();
    let edges = pairs(n).filter(|_| rng.gen::<f64>() < p).collect();
    Ok(unit_graph(n, edges))
}

/// Continuous power law with density proportional to `x^{-slope}` on
/// `[1, inf)`, by inverse transform `x = (1 - u)^{-1 / (slope - 1)}`.
pub fn power_law_raw(n: usize, slope: f64, seed: Seed) -> Result<Vec<f64>> {
    check_slope(slope)?;
    let mut rng = seed.rng();
    let exponent = -1.0 / (slope - 1.0);
    Ok((0..n).map(|_| (1.0 - rng.gen::<f64>()).powf(exponent)).collect())
}

fn check_slope(slope: f64) -> Result<()> {
    if slope.is_nan() || slope <= 1.0 {
        return Err(Error::InvalidConfig(format!("power-law slope must exceed 1, got {slope}")));
    }
    Ok(())
}

/// Power-law opinions divided by their maximum, so the largest is exactly 1.
pub fn power_law_sample(n: usize, slope: f64, seed: Seed) -> Result<OpinionVector> {
    let raw = power_law_raw(n, slope, seed)?;
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    OpinionVector::new(raw.iter().map(|x| x / max).collect())
}

/// Norros-Reittu graph with capacities drawn from the power law.
pub fn norros_reittu(n: usize, slope: f64, seed: Seed) -> Result<WeightedGraph> {
    let capacities = power_law_raw(n, slope, seed)?;
    // separate stream for the edge coins
    norros_reittu_with_capacities(&capacities, Seed(seed.0 ^ 0x9e37_79b9_7f4a_7c15))
}

/// Pair `(i, j)` is present with probability `1 - exp(-W_i W_j / sum W)`.
pub fn norros_reittu_with_capacities(capacities: &[f64], seed: Seed) -> Result<WeightedGraph> {
    if capacities.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig("capacities must be positive and finite".into()));
    }
    let n = capacities.len();
    let total: f64 = capacities.iter().sum();
    let mut rng = seed.rng();
    let edges =
        pairs(n).filter(|&(i, j)| rng.gen::<f64>() < -(-capacities[i] * capacities[j] / total).exp_m1()).collect();
    Ok(unit_graph(n, edges))
}

/// `s_v = deg(v) / sum_u deg(u)` with weighted degrees.
pub fn degree_proportional_opinions(g: &WeightedGraph) -> Result<OpinionVector> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = g.degrees();
    let total: f64 = d.iter().sum();
    OpinionVector::new(d.iter().map(|x| x / total).collect())
}

pub fn uniform_opinions(n: usize, seed: Seed) -> Result<OpinionVector> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let mut rng = seed.rng();
    OpinionVector::new((0..n).map(|_| rng.gen::<f64>()).collect())
}

/// Continuous power-law exponent MLE `1 + k / sum ln(x_i / x_min)` over
/// samples `x_i >= x_min`.
pub fn power_law_mle(samples: &[f64], x_min: f64) -> Option<f64> {
    let tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    let log_sum: f64 = tail.iter().map(|x| (x / x_min).ln()).sum();
    (log_sum > 0.0).then(|| 1.0 + tail.len() as f64 / log_sum)
}

/// Approximate MLE for integer-valued samples `x_i >= x_min`:
/// `1 + k / sum ln(x_i / (x_min - 1/2))`.
pub fn discrete_power_law_mle(samples: &[f64], x_min: f64) -> Option<f64> {
    let tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    let log_sum: f64 = tail.iter().map(|x| (x / (x_min - 0.5)).ln()).sum();
    (log_sum > 0.0).then(|| 1.0 + tail.len() as f64 / log_sum)
}

/// Unweighted degree of every node.
pub fn unweighted_degrees(g: &WeightedGraph) -> Vec<usize> {
    let mut d = vec![0; g.node_count()];
    for &Edge { u, v, .. } in g.edges() {
        d[u] += 1;
        d[v] += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pair_count;

    #[test]
    fn er_extremes() {
        assert_eq!(erdos_renyi(10, 0.0, Seed(1)).unwrap().edge_count(), 0);
        assert_eq!(erdos_renyi(10, 1.0, Seed(1)).unwrap().edge_count(), pair_count(10));
        assert!(erdos_renyi(10, 1.5, Seed(1)).is_err());
    }

    #[test]
    fn er_edge_count_concentrates() {
        let n = 200;
        let pairs = pair_count(n) as f64;
        let sd = (pairs * 0.25).sqrt();
        for seed in 0..5 {
            let m = erdos_renyi(n, 0.5, Seed(seed)).unwrap().edge_count() as f64;
            assert!((m - 0.5 * pairs).abs() <= 4.0 * sd);
        }
    }

    #[test]
    fn power_law_opinions_normalized() {
        assert_eq!(power_law_sample(1, 2.0, Seed(3)).unwrap().as_slice(), &[1.0]);
        let s = power_law_sample(500, 2.5, Seed(4)).unwrap();
        assert_eq!(s.as_slice().iter().copied().fold(0.0, f64::max), 1.0);
        assert!(s.as_slice().iter().all(|&x| x > 0.0));
        assert!(power_law_sample(5, 1.0, Seed(4)).is_err());
    }

    #[test]
    fn degree_opinions() {
        let star = WeightedGraph::new(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(degree_proportional_opinions(&star).unwrap().as_slice(), &[0.5, 0.25, 0.25]);
        let cycle = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(degree_proportional_opinions(&cycle).unwrap().as_slice(), &[0.25; 4]);
        let edge = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(degree_proportional_opinions(&edge).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(degree_proportional_opinions(&WeightedGraph::empty(3)), Err(Error::EmptyGraph));
    }

    #[test]
    fn uniform_is_deterministic() {
        let a = uniform_opinions(50, Seed(11)).unwrap();
        assert_eq!(a, uniform_opinions(50, Seed(11)).unwrap());
        assert_ne!(a, uniform_opinions(50, Seed(12)).unwrap());
        assert!(a.as_slice().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn norros_reittu_single_node() {
        assert_eq!(norros_reittu(1, 2.0, Seed(0)).unwrap().edge_count(), 0);
    }
}
