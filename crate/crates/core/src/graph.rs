//! Undirected weighted graphs, Laplacians, and the dense pair-indexed weight
//! vector used as the decision variable of the topology optimizer.
//!
//! Unordered pairs `(u, v)` with `u < v` are indexed lexicographically:
//! `(0,1), (0,2), .., (0,n-1), (1,2), ..`. The incidence column of pair
//! `(u, v)` has `+1` at `u` and `-1` at `v`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Number of unordered pairs on `n` nodes.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of the unordered pair `{u, v}`.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(v < n && u != v);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Iterator over all unordered pairs in index order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

/// Undirected graph with strictly positive edge weights on nodes `0..n`.
/// Edges are stored with `u < v`, sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph, normalizing every edge to `u < v`. Rejects self-loops,
    /// duplicates, out-of-range endpoints and weights that are not positive
    /// and finite.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b, w) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidWeight { u: a, v: b, w });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            out.push(Edge { u, v, w });
        }
        out.sort_by_key(|e| (e.u, e.v));
        if let Some(pair) = out.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::DuplicateEdge(pair[0].u, pair[0].v));
        }
        Ok(Self { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Path `0 - 1 - .. - (n-1)` with unit weights.
    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|v| Edge { u: v - 1, v, w: 1.0 }).collect();
        Self { n, edges }
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Self {
        let edges = pairs(n).map(|(u, v)| Edge { u, v, w: 1.0 }).collect();
        Self { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.edges.iter().map(|e| (e.u, e.v, e.w * factor)))
    }

    /// Combinatorial Laplacian `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            add_pair(&mut l, e.u, e.v, e.w);
        }
        l
    }

    /// Quadratic form `x^T L x = sum_e w_e (x_u - x_v)^2`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.edges.iter().map(|e| e.w * (x[e.u] - x[e.v]).powi(2)).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(self.n);
        let mut components = self.n;
        for e in &self.edges {
            if uf.union(e.u, e.v) {
                components -= 1;
            }
        }
        components == 1
    }

    /// Component label of every node (labels are `0..count`, in order of
    /// first appearance) and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        let mut label = vec![usize::MAX; self.n];
        let mut root_label = vec![usize::MAX; self.n];
        let mut count = 0;
        for (v, slot) in label.iter_mut().enumerate() {
            let root = uf.find(v);
            if root_label[root] == usize::MAX {
                root_label[root] = count;
                count += 1;
            }
            *slot = root_label[root];
        }
        (label, count)
    }

    pub fn to_dense_weights(&self) -> EdgeWeightVector {
        let mut w = vec![0.0; pair_count(self.n)];
        for e in &self.edges {
            w[pair_index(self.n, e.u, e.v)] = e.w;
        }
        EdgeWeightVector { n: self.n, w }
    }

    /// Keeps the pairs whose weight exceeds `threshold`.
    pub fn from_dense_weights(w: &EdgeWeightVector, threshold: f64) -> Result<Self> {
        w.check_nonnegative()?;
        let edges =
            pairs(w.n).zip(&w.w).filter(|(_, &x)| x > threshold).map(|((u, v), &x)| Edge { u, v, w: x }).collect();
        Ok(Self { n: w.n, edges })
    }
}

fn add_pair(l: &mut DMatrix<f64>, u: usize, v: usize, w: f64) {
    l[(u, u)] += w;
    l[(v, v)] += w;
    l[(u, v)] -= w;
    l[(v, u)] -= w;
}

/// Dense vector of weights over all `n(n-1)/2` unordered pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightVector {
    n: usize,
    w: Vec<f64>,
}

impl EdgeWeightVector {
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        let expected = pair_count(n);
        if w.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: w.len() });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("edge weight"));
        }
        Ok(Self { n, w })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, w: vec![0.0; pair_count(n)] }
    }

    /// Every pair carries `total / N`.
    pub fn uniform(n: usize, total: f64) -> Self {
        let count = pair_count(n);
        Self { n, w: vec![total / count as f64; count] }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.w[pair_index(self.n, u, v)]
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.w.iter().position(|&x| x < 0.0) {
            Some(index) => Err(Error::NegativeWeight { index, value: self.w[index] }),
            None => Ok(()),
        }
    }

    /// `w + eps * e_i`.
    pub fn perturbed(&self, i: usize, eps: f64) -> Self {
        let mut w = self.w.clone();
        w[i] += eps;
        Self { n: self.n, w }
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for ((u, v), &x) in pairs(self.n).zip(&self.w) {
            if x != 0.0 {
                add_pair(&mut l, u, v, x);
            }
        }
        l
    }
}

/// Incidence column of pair `(u, v)`: `+1` at `u`, `-1` at `v`.
pub fn incidence(n: usize, u: usize, v: usize) -> DVector<f64> {
    let mut b = DVector::zeros(n);
    b[u] = 1.0;
    b[v] = -1.0;
    b
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[[f64; 3]; 3]) -> DMatrix<f64> {
        DMatrix::from_fn(3, 3, |i, j| rows[i][j])
    }

    #[test]
    fn path_and_star_laplacians() {
        let path = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(path.laplacian(), mat(&[[1., -1., 0.], [-1., 2., -1.], [0., -1., 1.]]));
        let star = WeightedGraph::new(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(star.laplacian(), mat(&[[2., -1., -1.], [-1., 1., 0.], [-1., 0., 1.]]));
        assert_eq!(WeightedGraph::empty(4).laplacian(), DMatrix::zeros(4, 4));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(WeightedGraph::new(3, [(0, 1, 0.0)]), Err(Error::InvalidWeight { .. })));
        assert!(matches!(WeightedGraph::new(3, [(0, 1, -1.0)]), Err(Error::InvalidWeight { .. })));
        assert_eq!(WeightedGraph::new(3, [(1, 1, 1.0)]), Err(Error::SelfLoop(1)));
        assert_eq!(WeightedGraph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]), Err(Error::DuplicateEdge(0, 1)));
        assert!(matches!(WeightedGraph::new(2, [(0, 2, 1.0)]), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn pair_indexing_is_lexicographic() {
        let n = 5;
        for (i, (u, v)) in pairs(n).enumerate() {
            assert_eq!(pair_index(n, u, v), i);
            assert_eq!(pair_index(n, v, u), i);
        }
        assert_eq!(pair_count(n), 10);
    }

    #[test]
    fn dense_weight_conversions() {
        let g = WeightedGraph::new(2, [(0, 1, 3.0)]).unwrap();
        assert_eq!(g.to_dense_weights().as_slice(), &[3.0]);
        assert_eq!(WeightedGraph::empty(3).to_dense_weights().as_slice(), &[0.0; 3]);
        let tri = WeightedGraph::complete(3);
        assert_eq!(tri.to_dense_weights().as_slice(), &[1.0; 3]);

        let w = EdgeWeightVector::new(3, vec![0.0, 2.0, 0.0]).unwrap();
        let g = WeightedGraph::from_dense_weights(&w, 0.0).unwrap();
        assert_eq!(g.edges(), &[Edge { u: 0, v: 2, w: 2.0 }]);
        let zero = WeightedGraph::from_dense_weights(&EdgeWeightVector::zeros(3), 0.0).unwrap();
        assert_eq!(zero.edge_count(), 0);
        let w = EdgeWeightVector::new(3, vec![1e-12, 1.0, 1.0]).unwrap();
        assert_eq!(WeightedGraph::from_dense_weights(&w, 1e-9).unwrap().edge_count(), 2);
        let neg = EdgeWeightVector::new(3, vec![-1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(WeightedGraph::from_dense_weights(&neg, 0.0), Err(Error::NegativeWeight { index: 0, .. })));
        assert!(EdgeWeightVector::new(3, vec![1.0]).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(WeightedGraph::path(3).is_connected());
        assert!(!WeightedGraph::empty(2).is_connected());
        assert!(WeightedGraph::empty(1).is_connected());
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.components(), (vec![0, 0, 1, 1], 2));
        assert_eq!(WeightedGraph::empty(3).components().1, 3);
    }

    fn arb_graph() -> impl Strategy<Value = WeightedGraph> {
        (2usize..12).prop_flat_map(|n| {
            proptest::collection::vec(proptest::option::of(0.01f64..5.0), pair_count(n)).prop_map(move |ws| {
                let edges = pairs(n).zip(ws).filter_map(|((u, v), w)| w.map(|w| (u, v, w)));
                WeightedGraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn laplacian_kernel_and_trace(g in arb_graph()) {
            let l = g.laplacian();
            let ones = DVector::from_element(g.node_count(), 1.0);
            prop_assert!((&l * ones).amax() <= 1e-12);
            prop_assert!((l.trace() - 2.0 * g.total_weight()).abs() <= 1e-12 * (1.0 + g.total_weight()));
            prop_assert_eq!(&l, &l.transpose());
        }

        #[test]
        fn dense_round_trip(g in arb_graph()) {
            let back = WeightedGraph::from_dense_weights(&g.to_dense_weights(), 0.0).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn rank_one_update(g in arb_graph(), eps in 0.001f64..3.0, pick in 0usize..1000) {
            let n = g.node_count();
            let w = g.to_dense_weights();
            let i = pick % w.len();
            let (u, v) = pairs(n).nth(i).unwrap();
            let b = incidence(n, u, v);
            let expected = w.laplacian() + (&b * b.transpose()) * eps;
            prop_assert!((w.perturbed(i, eps).laplacian() - expected).amax() <= 1e-12);
        }
    }
}
