//! Spectral sparsification by effective-resistance sampling.
//!
//! Edge `e` is drawn with probability `p_e = w_e R_e / (n - c)` (`c` the
//! number of components), `q` times with replacement, and every draw adds
//! `w_e / (q p_e)` to the output edge. Resistances are exact, read off the
//! inverse of `L + sum_C 1_C 1_C^T / |C|`, which equals `L^+` plus the
//! projector onto the kernel of `L`.

use nalgebra::Cholesky;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSize {
    /// `q = ceil(oversample * n ln n / epsilon^2)`.
    Epsilon {
        epsilon: f64,
        oversample: f64,
    },
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyConfig {
    pub size: SampleSize,
    pub seed: u64,
}

pub const DEFAULT_OVERSAMPLE: f64 = 4.0;

impl SparsifyConfig {
    pub fn epsilon(epsilon: f64, seed: u64) -> Self {
        Self { size: SampleSize::Epsilon { epsilon, oversample: DEFAULT_OVERSAMPLE }, seed }
    }

    pub fn samples(q: usize, seed: u64) -> Self {
        Self { size: SampleSize::Count(q), seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self.size {
            SampleSize::Epsilon { epsilon, oversample } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1), got {epsilon}")));
                }
                if !(oversample > 0.0 && oversample.is_finite()) {
                    return Err(Error::InvalidConfig(format!("oversample must be positive, got {oversample}")));
                }
            }
            SampleSize::Count(0) => return Err(Error::InvalidConfig("sample count must be >= 1".into())),
            SampleSize::Count(_) => {}
        }
        Ok(())
    }

    /// Number of draws for a graph on `n` nodes.
    pub fn sample_count(&self, n: usize) -> usize {
        match self.size {
            SampleSize::Count(q) => q,
            SampleSize::Epsilon { epsilon, oversample } => {
                let n = n as f64;
                ((oversample * n * n.ln() / (epsilon * epsilon)).ceil() as usize).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    pub graph: WeightedGraph,
    pub samples: usize,
    /// The sampled graph can come out disconnected; it is returned anyway.
    pub connected: bool,
}

/// `R_e = b_e^T L^+ b_e` for every edge of a connected graph, in edge order.
pub fn effective_resistances(g: &WeightedGraph) -> Result<Vec<f64>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    component_resistances(g)
}

/// Edge resistances measured inside each edge's own component; defined for
/// disconnected graphs too.
pub fn component_resistances(g: &WeightedGraph) -> Result<Vec<f64>> {
    let n = g.node_count();
    let (label, count) = g.components();
    let mut size = vec![0usize; count];
    for &c in &label {
        size[c] += 1;
    }
    let mut shifted = g.laplacian();
    for i in 0..n {
        for j in 0..n {
            if label[i] == label[j] {
                shifted[(i, j)] += 1.0 / size[label[i]] as f64;
            }
        }
    }
    let inv = Cholesky::new(shifted).ok_or(Error::NotPositiveDefinite)?.inverse();
    Ok(g.edges().iter().map(|e| inv[(e.u, e.u)] + inv[(e.v, e.v)] - 2.0 * inv[(e.u, e.v)]).collect())
}

/// Sampling probabilities `w_e R_e / (n - c)`, renormalized to sum to one.
pub fn sampling_probabilities(g: &WeightedGraph) -> Result<Vec<f64>> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let r = component_resistances(g)?;
    let raw: Vec<f64> = g.edges().iter().zip(&r).map(|(e, r)| e.w * r).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / total).collect())
}

pub fn sparsify(g: &WeightedGraph, config: &SparsifyConfig) -> Result<Sparsified> {
    config.validate()?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let p = sampling_probabilities(g)?;
    let q = config.sample_count(g.node_count());
    let dist = WeightedIndex::new(&p).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut acc = vec![0.0; g.edge_count()];
    for _ in 0..q {
        let i = dist.sample(&mut rng);
        acc[i] += g.edges()[i].w / (q as f64 * p[i]);
    }
    let graph = WeightedGraph::new(
        g.node_count(),
        g.edges().iter().zip(&acc).filter(|(_, &w)| w > 0.0).map(|(e, &w)| (e.u, e.v, w)),
    )?;
    let connected = graph.is_connected();
    Ok(Sparsified { graph, samples: q, connected })
}

/// Scales all weights so the total becomes `target_total` (trace `2 * target_total`).
pub fn rescale_trace(g: &WeightedGraph, target_total: f64) -> Result<WeightedGraph> {
    let total = g.total_weight();
    if total <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    if !(target_total > 0.0 && target_total.is_finite()) {
        return Err(Error::InvalidConfig(format!("target total must be positive, got {target_total}")));
    }
    if total == target_total {
        return Ok(g.clone());
    }
    g.scaled(target_total / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistance_examples() {
        let g = WeightedGraph::new(2, [(0, 1, 4.0)]).unwrap();
        assert!((effective_resistances(&g).unwrap()[0] - 0.25).abs() < 1e-12);
        let r = effective_resistances(&WeightedGraph::path(3)).unwrap();
        assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let r = effective_resistances(&WeightedGraph::complete(3)).unwrap();
        assert!(r.iter().all(|x| (x - 2.0 / 3.0).abs() < 1e-12));
        let split = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(effective_resistances(&split), Err(Error::Disconnected));
    }

    #[test]
    fn single_draw() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        let p = sampling_probabilities(&g).unwrap();
        let out = sparsify(&g, &SparsifyConfig::samples(1, 9)).unwrap();
        assert_eq!(out.graph.edge_count(), 1);
        let e = out.graph.edges()[0];
        let i = g.edges().iter().position(|o| (o.u, o.v) == (e.u, e.v)).unwrap();
        assert!((e.w - g.edges()[i].w / p[i]).abs() < 1e-12);
        assert!(!out.connected);
    }

    #[test]
    fn disconnected_input_sampled_per_component() {
        let g = WeightedGraph::new(5, [(0, 1, 2.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let r = component_resistances(&g).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!((r[1] - 1.0).abs() < 1e-12 && (r[2] - 1.0).abs() < 1e-12);
        // Foster with c = 2 components: 2 * 0.5 + 1 + 1 = n - c
        let foster: f64 = g.edges().iter().zip(&r).map(|(e, r)| e.w * r).sum();
        assert!((foster - 3.0).abs() < 1e-12);
        let out = sparsify(&g, &SparsifyConfig::samples(50, 1)).unwrap();
        assert!(out.graph.edge_count() <= 3);
    }

    #[test]
    fn config_validation() {
        assert!(SparsifyConfig::epsilon(0.0, 0).validate().is_err());
        assert!(SparsifyConfig::epsilon(1.0, 0).validate().is_err());
        assert!(SparsifyConfig::samples(0, 0).validate().is_err());
        let c = SparsifyConfig::epsilon(0.5, 0);
        assert_eq!(c.sample_count(10), (4.0 * 10.0 * 10f64.ln() / 0.25).ceil() as usize);
    }

    #[test]
    fn rescale_examples() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let r = rescale_trace(&g, 1.0).unwrap();
        assert!((r.edges()[0].w - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.edges()[1].w - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.laplacian().trace() - 2.0).abs() < 1e-12);
        assert_eq!(rescale_trace(&g, 3.0).unwrap(), g);
        assert_eq!(rescale_trace(&WeightedGraph::empty(3), 1.0), Err(Error::EmptyGraph));
    }
}
