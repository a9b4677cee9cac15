//! Budgeted decrease of innate opinions on a fixed graph.
//!
//! Minimizes the polarization-disagreement index of `s + ds`, i.e.
//! `(s + ds)_bar^T (I + L)^{-1} (s + ds)_bar`, over
//! `{ lower <= ds <= 0, 1^T ds >= -alpha }` with `lower = -s` by default.
//! The objective is a convex quadratic; it is minimized by projected
//! gradient with an exact projection onto the feasible set.

use nalgebra::DVector;

use crate::dynamics::{EquilibriumReport, EquilibriumSolver, OpinionVector};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::centered;
use crate::optim::{projected_gradient, OptimizerConfig};

const BISECTION_ITERS: usize = 200;

/// Projected-gradient residual the solver must reach before it reports convergence.
pub const SOLVER_STATIONARITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionProblem {
    graph: WeightedGraph,
    s: OpinionVector,
    alpha: f64,
    lower: Vec<f64>,
}

impl InterventionProblem {
    pub fn new(graph: WeightedGraph, s: OpinionVector, alpha: f64) -> Result<Self> {
        if graph.node_count() != s.len() {
            return Err(Error::DimensionMismatch { expected: graph.node_count(), got: s.len() });
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("budget must be nonnegative, got {alpha}")));
        }
        let lower = s.as_slice().iter().map(|x| -x).collect();
        Ok(Self { graph, s, alpha, lower })
    }

    /// Tighter per-node lower bounds on `ds`; each must lie in `[-s_i, 0]`.
    pub fn with_lower_bounds(mut self, lower: Vec<f64>) -> Result<Self> {
        if lower.len() != self.s.len() {
            return Err(Error::DimensionMismatch { expected: self.s.len(), got: lower.len() });
        }
        for (i, (&lo, &s)) in lower.iter().zip(self.s.as_slice()).enumerate() {
            if !(lo <= 0.0 && lo >= -s) {
                return Err(Error::InvalidConfig(format!("lower bound {lo} at node {i} outside [-s_i, 0]")));
            }
        }
        self.lower = lower;
        Ok(self)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn opinions(&self) -> &OpinionVector {
        &self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        project_box_halfspace(y, &self.lower, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionResult {
    pub alpha: f64,
    pub ds: Vec<f64>,
    pub objective: f64,
    pub budget_used: f64,
    pub report: EquilibriumReport,
    pub iterations: usize,
    pub converged: bool,
    /// `max_i |P(ds - grad) - ds|_i` at the returned point.
    pub stationarity: f64,
}

fn clipped_sum(y: &[f64], lower: &[f64], mu: f64) -> f64 {
    y.iter().zip(lower).map(|(v, lo)| (v + mu).clamp(*lo, 0.0)).sum()
}

/// Euclidean projection onto `{ lower <= x <= 0, sum(x) >= -alpha }`.
pub fn project_box_halfspace(y: &[f64], lower: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if y.len() != lower.len() {
        return Err(Error::DimensionMismatch { expected: lower.len(), got: y.len() });
    }
    if y.iter().chain(lower).any(|v| v.is_nan()) || alpha.is_nan() {
        return Err(Error::NonFinite("projection input"));
    }
    if lower.iter().any(|&lo| lo > 0.0) || alpha < 0.0 {
        return Err(Error::InvalidConfig("lower bounds must be <= 0 and alpha >= 0".into()));
    }
    if clipped_sum(y, lower, 0.0) >= -alpha {
        return Ok(y.iter().zip(lower).map(|(v, lo)| v.clamp(*lo, 0.0)).collect());
    }
    // sum(clip(y + mu)) is nondecreasing in mu and reaches 0 at mu = max(-y)
    let (mut lo, mut hi) = (0.0f64, y.iter().fold(0.0f64, |m, v| m.max(-v)));
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clipped_sum(y, lower, mid) >= -alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(y.iter().zip(lower).map(|(v, l)| (v + hi).clamp(*l, 0.0)).collect())
}

struct Objective<'a> {
    solver: EquilibriumSolver<'a>,
    s: &'a [f64],
}

impl Objective<'_> {
    fn eval(&self, ds: &[f64]) -> (f64, Vec<f64>) {
        let x = DVector::from_iterator(ds.len(), self.s.iter().zip(ds).map(|(a, b)| a + b));
        let x_bar = centered(&x);
        let v = self.solver.factor().solve(&x_bar);
        (x_bar.dot(&v), (v * 2.0).as_slice().to_vec())
    }
}

fn stationarity(problem: &InterventionProblem, ds: &[f64], grad: &[f64]) -> Result<f64> {
    let step: Vec<f64> = ds.iter().zip(grad).map(|(x, g)| x - g).collect();
    let p = problem.project(&step)?;
    Ok(p.iter().zip(ds).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn optimize_with(
    problem: &InterventionProblem,
    objective: &Objective<'_>,
    config: &OptimizerConfig,
    ds0: Vec<f64>,
) -> Result<InterventionResult> {
    let eval = |x: &[f64]| Ok(objective.eval(x));
    let project = |y: &[f64]| problem.project(y).expect("inputs validated");
    let stationary = |x: &[f64], g: &[f64]| stationarity(problem, x, g).is_ok_and(|r| r <= SOLVER_STATIONARITY_TOL);
    let out = projected_gradient(ds0, config, eval, project, stationary, &mut |_, _| {})?;
    let shifted: Vec<f64> = problem.s.as_slice().iter().zip(&out.x).map(|(a, b)| a + b).collect();
    let report = objective.solver.report(&shifted)?;
    let stationarity = stationarity(problem, &out.x, &out.gradient)?;
    Ok(InterventionResult {
        alpha: problem.alpha,
        budget_used: -out.x.iter().sum::<f64>(),
        ds: out.x,
        objective: out.objective,
        report,
        iterations: out.iterations,
        converged: out.converged,
        stationarity,
    })
}

/// Solves the intervention problem starting from `ds = 0`.
pub fn optimize_opinions(problem: &InterventionProblem, config: &OptimizerConfig) -> Result<InterventionResult> {
    let objective = Objective { solver: EquilibriumSolver::new(&problem.graph)?, s: problem.s.as_slice() };
    optimize_with(problem, &objective, config, vec![0.0; problem.s.len()])
}

/// One result per budget. `I + L` is factorized once and each budget
/// warm-starts from the previous optimum, which stays feasible because the
/// feasible sets are nested.
pub fn budget_sweep(
    g: &WeightedGraph,
    s: &OpinionVector,
    alphas: &[f64],
    config: &OptimizerConfig,
) -> Result<Vec<InterventionResult>> {
    if alphas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedBudgets);
    }
    let objective = Objective { solver: EquilibriumSolver::new(g)?, s: s.as_slice() };
    let mut start = vec![0.0; s.len()];
    let mut results = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let problem = InterventionProblem::new(g.clone(), s.clone(), alpha)?;
        let result = optimize_with(&problem, &objective, config, start)?;
        start = result.ds.clone();
        results.push(result);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::index;

    fn opinions(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn projection_inside_is_identity() {
        let y = [-0.2, -0.1, 0.0];
        assert_eq!(project_box_halfspace(&y, &[-1.0; 3], 1.0).unwrap(), y.to_vec());
    }

    #[test]
    fn projection_budget_binds() {
        let p = project_box_halfspace(&[-3.0, -3.0], &[-1.0, -1.0], 1.0).unwrap();
        assert!((p[0] + 0.5).abs() < 1e-12 && (p[1] + 0.5).abs() < 1e-12);
        assert!(p.iter().sum::<f64>() >= -1.0);
    }

    #[test]
    fn zero_budget_projects_to_zero() {
        let p = project_box_halfspace(&[-0.3, 0.4, -2.0], &[-1.0; 3], 0.0).unwrap();
        assert_eq!(p, vec![0.0; 3]);
    }

    #[test]
    fn projection_rejects_nan() {
        assert!(matches!(project_box_halfspace(&[f64::NAN], &[-1.0], 1.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn zero_budget_keeps_opinions() {
        let g = WeightedGraph::path(4);
        let s = opinions(&[0.1, 0.9, 0.4, 0.7]);
        let p = InterventionProblem::new(g.clone(), s.clone(), 0.0).unwrap();
        let r = optimize_opinions(&p, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.ds, vec![0.0; 4]);
        assert!((r.objective - index(&g, &s).unwrap().index).abs() < 1e-12);
    }

    #[test]
    fn zero_opinions_stay_zero() {
        let p = InterventionProblem::new(WeightedGraph::complete(3), opinions(&[0.0; 3]), 2.0).unwrap();
        let r = optimize_opinions(&p, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.ds, vec![0.0; 3]);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn two_node_reduces_extreme_opinion() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let p = InterventionProblem::new(g, opinions(&[0.0, 1.0]), 0.5).unwrap();
        let r = optimize_opinions(&p, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.ds[0], 0.0);
        assert!((r.ds[1] + 0.5).abs() < 1e-6);
        // (0.5)^2 / 2 spread over (I+L)^{-1} eigenvalue 1/3 on the centered direction
        assert!((r.objective - 0.125 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_unsorted() {
        let g = WeightedGraph::path(3);
        let s = opinions(&[0.1, 0.5, 0.9]);
        assert_eq!(budget_sweep(&g, &s, &[1.0, 0.5], &OptimizerConfig::default()), Err(Error::UnsortedBudgets));
    }

    #[test]
    fn lower_bounds_validated() {
        let p = InterventionProblem::new(WeightedGraph::path(2), opinions(&[0.3, 0.6]), 1.0).unwrap();
        assert!(p.clone().with_lower_bounds(vec![-0.4, 0.0]).is_err());
        assert!(p.with_lower_bounds(vec![-0.2, -0.1]).is_ok());
        assert!(InterventionProblem::new(WeightedGraph::path(2), opinions(&[0.3, 0.6]), -1.0).is_err());
    }
}
