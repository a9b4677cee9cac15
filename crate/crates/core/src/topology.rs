//! Convex optimization of the graph topology.
//!
//! Minimizes `f(w) = s_bar^T (I + L(w))^{-1} s_bar` over edge weights
//! `w >= 0` with `sum(w) = m` (i.e. `Tr(L) = 2m`). With
//! `v = (I + L)^{-1} s_bar` the partial derivative in pair `(u, v)` is
//! `-(v_u - v_v)^2`, so one linear solve yields the whole gradient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};
use crate::graph::{EdgeWeightVector, WeightedGraph};
use crate::linalg::{centered, ShiftedLaplacian};
use crate::optim::{projected_gradient, OptimizerConfig};

/// Relative tolerance used when checking that a point sums to its total.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Relative KKT tolerance the solver must reach before it reports convergence.
pub const SOLVER_KKT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyProblem {
    s: OpinionVector,
    total_weight: f64,
}

impl TopologyProblem {
    pub fn new(s: OpinionVector, total_weight: f64) -> Result<Self> {
        if s.len() < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 nodes, got {}", s.len())));
        }
        if !(total_weight > 0.0 && total_weight.is_finite()) {
            return Err(Error::InvalidConfig(format!("total weight must be positive, got {total_weight}")));
        }
        Ok(Self { s, total_weight })
    }

    pub fn node_count(&self) -> usize {
        self.s.len()
    }

    pub fn opinions(&self) -> &OpinionVector {
        &self.s
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySolution {
    pub w_opt: EdgeWeightVector,
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub connected: bool,
    pub history: Vec<f64>,
}

impl TopologySolution {
    pub fn graph(&self) -> WeightedGraph {
        WeightedGraph::from_dense_weights(&self.w_opt, 0.0).expect("solution weights are nonnegative")
    }

    pub fn kkt(&self) -> KktCertificate {
        simplex_kkt(self.w_opt.as_slice(), &self.gradient)
    }
}

fn check_opinions(w: &EdgeWeightVector, s: &OpinionVector) -> Result<()> {
    w.check_nonnegative()?;
    if w.node_count() != s.len() {
        return Err(Error::DimensionMismatch { expected: w.node_count(), got: s.len() });
    }
    Ok(())
}

/// `(I + L(w))^{-1} s_bar` together with `s_bar`.
fn potentials(w: &EdgeWeightVector, s: &OpinionVector) -> Result<(DVector<f64>, DVector<f64>)> {
    check_opinions(w, s)?;
    let factor = ShiftedLaplacian::new(w.laplacian())?;
    let s_bar = centered(&DVector::from_column_slice(s.as_slice()));
    let v = factor.solve(&s_bar);
    Ok((s_bar, v))
}

fn pair_gradient(v: &DVector<f64>) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let vu = v[u];
            (u + 1..n).map(move |j| -(vu - v[j]).powi(2))
        })
        .collect()
}

/// `s_bar^T (I + L(w))^{-1} s_bar`.
pub fn objective(w: &EdgeWeightVector, s: &OpinionVector) -> Result<f64> {
    let (s_bar, v) = potentials(w, s)?;
    Ok(s_bar.dot(&v))
}

/// Closed-form gradient with respect to every pair weight.
pub fn gradient(w: &EdgeWeightVector, s: &OpinionVector) -> Result<Vec<f64>> {
    Ok(objective_and_gradient(w, s)?.1)
}

pub fn objective_and_gradient(w: &EdgeWeightVector, s: &OpinionVector) -> Result<(f64, Vec<f64>)> {
    let (s_bar, v) = potentials(w, s)?;
    Ok((s_bar.dot(&v), pair_gradient(&v)))
}

/// Euclidean projection onto `{x >= 0, sum(x) = total}` by sort-and-threshold.
pub fn project_simplex(w: &[f64], total: f64) -> Vec<f64> {
    if w.is_empty() {
        return Vec::new();
    }
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - total) / (j + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    w.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn check_feasible(w: &EdgeWeightVector, n: usize, total: f64) -> Result<()> {
    if w.node_count() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.node_count() });
    }
    w.check_nonnegative()?;
    let sum = w.sum();
    if (sum - total).abs() > FEASIBILITY_TOL * total {
        return Err(Error::Infeasible(format!("weights sum to {sum}, expected {total}")));
    }
    Ok(())
}

/// Projected gradient descent from `w0` (default: uniform clique).
pub fn solve(
    problem: &TopologyProblem,
    config: &OptimizerConfig,
    w0: Option<EdgeWeightVector>,
) -> Result<TopologySolution> {
    solve_observed(problem, config, w0, &mut |_, _| {})
}

/// As [`solve`], calling `observer` with every accepted iterate and its objective.
pub fn solve_observed(
    problem: &TopologyProblem,
    config: &OptimizerConfig,
    w0: Option<EdgeWeightVector>,
    observer: &mut dyn FnMut(&[f64], f64),
) -> Result<TopologySolution> {
    let n = problem.node_count();
    let total = problem.total_weight;
    let w0 = match w0 {
        Some(w) => {
            check_feasible(&w, n, total)?;
            w
        }
        None => EdgeWeightVector::uniform(n, total),
    };
    let s = &problem.s;
    let eval = |x: &[f64]| {
        let w = EdgeWeightVector::new(n, x.to_vec())?;
        objective_and_gradient(&w, s)
    };
    let project = |x: &[f64]| project_simplex(x, total);
    let stationary = |x: &[f64], g: &[f64]| simplex_kkt(x, g).holds(SOLVER_KKT_TOL);
    let out = projected_gradient(w0.into_vec(), config, eval, project, stationary, observer)?;
    let w_opt = EdgeWeightVector::new(n, out.x)?;
    let connected = WeightedGraph::from_dense_weights(&w_opt, 0.0)?.is_connected();
    Ok(TopologySolution {
        w_opt,
        objective: out.objective,
        gradient: out.gradient,
        iterations: out.iterations,
        converged: out.converged,
        connected,
        history: out.history,
    })
}

/// First-order optimality measures over the scaled simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktCertificate {
    /// `max |g_i|`.
    pub scale: f64,
    /// Spread of the gradient over the support, relative to `scale`.
    pub support_spread: f64,
    /// Largest amount by which an off-support gradient entry falls below the
    /// support minimum, relative to `scale`.
    pub off_support_violation: f64,
    pub support_size: usize,
}

impl KktCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.support_spread <= tol && self.off_support_violation <= tol
    }
}

/// Weights above this count as being in the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

pub fn simplex_kkt(w: &[f64], grad: &[f64]) -> KktCertificate {
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let (mut lo, mut hi, mut support) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (&x, &g) in w.iter().zip(grad) {
        if x > SUPPORT_THRESHOLD {
            lo = lo.min(g);
            hi = hi.max(g);
            support += 1;
        }
    }
    if support == 0 || scale == 0.0 {
        return KktCertificate { scale, support_spread: 0.0, off_support_violation: 0.0, support_size: support };
    }
    let violation = w
        .iter()
        .zip(grad)
        .filter(|(&x, _)| x <= SUPPORT_THRESHOLD)
        .map(|(_, &g)| (lo - g).max(0.0))
        .fold(0.0, f64::max);
    KktCertificate {
        scale,
        support_spread: (hi - lo) / scale,
        off_support_violation: violation / scale,
        support_size: support,
    }
}

/// Checks `f(l w1 + (1-l) w2) <= l f(w1) + (1-l) f(w2) + 1e-9` for
/// `l in {1/k, .., (k-1)/k}`.
pub fn convexity_probe(w1: &EdgeWeightVector, w2: &EdgeWeightVector, s: &OpinionVector, k: usize) -> Result<bool> {
    if w1.len() != w2.len() {
        return Err(Error::DimensionMismatch { expected: w1.len(), got: w2.len() });
    }
    w1.check_nonnegative()?;
    w2.check_nonnegative()?;
    let (t1, t2) = (w1.sum(), w2.sum());
    if (t1 - t2).abs() > FEASIBILITY_TOL * t1.abs().max(t2.abs()).max(1.0) {
        return Err(Error::MismatchedTotals(t1, t2));
    }
    let (f1, f2) = (objective(w1, s)?, objective(w2, s)?);
    for j in 1..k {
        let lambda = j as f64 / k as f64;
        let mix: Vec<f64> =
            w1.as_slice().iter().zip(w2.as_slice()).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let fm = objective(&EdgeWeightVector::new(w1.node_count(), mix)?, s)?;
        if fm > lambda * f1 + (1.0 - lambda) * f2 + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(I + L)^{-1} L (I + L)^{-1}`, the matrix behind the disagreement term.
pub fn disagreement_operator(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let shifted = l + DMatrix::identity(n, n);
    let inv = shifted.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    Ok(&inv * l * &inv)
}

/// `l g(L1) + (1-l) g(L2) - g(l L1 + (1-l) L2)` for the disagreement operator `g`.
pub fn convexity_gap_matrix(l1: &DMatrix<f64>, l2: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let mixed = l1 * lambda + l2 * (1.0 - lambda);
    Ok(disagreement_operator(l1)? * lambda + disagreement_operator(l2)? * (1.0 - lambda)
        - disagreement_operator(&mixed)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexityWitness {
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub gap: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

/// Two 3-node paths whose midpoint breaks matrix convexity of the
/// disagreement-only objective: the gap matrix has a negative eigenvalue.
pub fn nonconvexity_witness() -> NonconvexityWitness {
    let l1 = WeightedGraph::path(3).laplacian();
    let l2 = WeightedGraph::new(3, [(0, 1, 1.0), (0, 2, 1.0)]).expect("star").laplacian();
    let gap = convexity_gap_matrix(&l1, &l2, 0.5).expect("I + L is invertible");
    let min_eigenvalue = min_eigenvalue(&gap);
    NonconvexityWitness { l1, l2, gap, min_eigenvalue }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pair_count;

    fn opinions(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let w = EdgeWeightVector::new(2, vec![1.0]).unwrap();
        let s = opinions(&[0.0, 1.0]);
        assert!((objective(&w, &s).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        let c = opinions(&[0.3; 4]);
        assert_eq!(objective(&EdgeWeightVector::uniform(4, 2.0), &c).unwrap(), 0.0);
        let w = EdgeWeightVector::new(3, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((objective(&w, &opinions(&[0.0, 0.0, 1.0])).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let neg = EdgeWeightVector::new(2, vec![-1.0]).unwrap();
        assert!(matches!(objective(&neg, &s), Err(Error::NegativeWeight { .. })));
    }

    #[test]
    fn gradient_examples() {
        let w = EdgeWeightVector::new(2, vec![1.0]).unwrap();
        let g = gradient(&w, &opinions(&[0.0, 1.0])).unwrap();
        assert!((g[0] + 1.0 / 9.0).abs() < 1e-14);
        let g = gradient(&EdgeWeightVector::uniform(5, 1.0), &opinions(&[0.6; 5])).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        assert_eq!(g.len(), pair_count(5));
    }

    #[test]
    fn simplex_projection_examples() {
        let feasible = [0.2, 0.5, 0.3];
        let p = project_simplex(&feasible, 1.0);
        assert!(p.iter().zip(feasible).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(project_simplex(&[2.0, 0.0], 1.0), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5], 1.0);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn solve_beats_best_single_edge() {
        let problem = TopologyProblem::new(opinions(&[0.0, 0.0, 1.0]), 1.0).unwrap();
        let sol = solve(&problem, &OptimizerConfig::default(), None).unwrap();
        assert!(sol.objective <= 1.0 / 3.0);
        assert!(sol.converged);
        assert!((sol.w_opt.sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_opinions_stop_immediately() {
        let problem = TopologyProblem::new(opinions(&[0.4; 6]), 3.0).unwrap();
        let sol = solve(&problem, &OptimizerConfig::default(), None).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.iterations, 1);
        assert!(sol.converged);
        assert_eq!(sol.w_opt, EdgeWeightVector::uniform(6, 3.0));
    }

    #[test]
    fn rejects_infeasible_start() {
        let problem = TopologyProblem::new(opinions(&[0.0, 0.5, 1.0]), 1.0).unwrap();
        let w0 = EdgeWeightVector::new(3, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(solve(&problem, &OptimizerConfig::default(), Some(w0)), Err(Error::Infeasible(_))));
        let w0 = EdgeWeightVector::new(3, vec![1.5, -0.5, 0.0]).unwrap();
        assert!(solve(&problem, &OptimizerConfig::default(), Some(w0)).is_err());
        assert!(TopologyProblem::new(opinions(&[0.5]), 1.0).is_err());
        assert!(TopologyProblem::new(opinions(&[0.5, 0.1]), 0.0).is_err());
    }

    #[test]
    fn probe_rejects_mismatched_totals() {
        let s = opinions(&[0.0, 0.5, 1.0]);
        let w1 = EdgeWeightVector::uniform(3, 1.0);
        let w2 = EdgeWeightVector::uniform(3, 2.0);
        assert!(matches!(convexity_probe(&w1, &w2, &s, 4), Err(Error::MismatchedTotals(..))));
        assert!(convexity_probe(&w1, &w1, &s, 4).unwrap());
    }

    #[test]
    fn witness_identical_laplacians_give_zero_gap() {
        let l = WeightedGraph::path(3).laplacian();
        let gap = convexity_gap_matrix(&l, &l, 0.5).unwrap();
        assert!(gap.amax() < 1e-15);
        assert!(min_eigenvalue(&gap).abs() < 1e-15);
    }

    #[test]
    fn kkt_on_flat_gradient() {
        let cert = simplex_kkt(&[0.5, 0.5, 0.0], &[-1.0, -1.0, -0.5]);
        assert!(cert.holds(1e-12));
        let cert = simplex_kkt(&[0.5, 0.5, 0.0], &[-1.0, -0.8, -2.0]);
        assert!((cert.support_spread - 0.1).abs() < 1e-12);
        assert!((cert.off_support_violation - 0.5).abs() < 1e-12);
    }
}
