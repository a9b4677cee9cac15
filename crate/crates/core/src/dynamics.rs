//! Friedkin-Johnsen equilibria and the polarization / disagreement index.
//!
//! The expressed opinions at equilibrium are `z* = (I + L)^{-1} s`. With
//! `z_bar` the mean-centered equilibrium, polarization is `z_bar^T z_bar`,
//! disagreement is `sum_(u,v) w_uv (z*_u - z*_v)^2`, and their sum equals
//! `s_bar^T (I + L)^{-1} s_bar`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{centered, mean, ShiftedLaplacian, SolverKind};

/// Tolerance on `|sum(x)|` accepted by [`polarization`].
pub const CENTERING_TOL: f64 = 1e-8;

/// Innate opinions, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OpinionOutOfRange { index, value: values[index] });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Mean-centered opinions `s_bar`.
    pub fn centered(&self) -> Vec<f64> {
        center(&self.0).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub z_star: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub polarization: f64,
    pub disagreement: f64,
    pub index: f64,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `x - mean(x) 1`.
pub fn center(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mean = mean(x);
    Ok(x.iter().map(|v| v - mean).collect())
}

/// Equilibrium `z* = (I + L)^{-1} s`.
pub fn equilibrium(g: &WeightedGraph, s: &OpinionVector) -> Result<Vec<f64>> {
    EquilibriumSolver::new(g)?.equilibrium(s.as_slice())
}

/// `sum_(u,v) w_uv (z_u - z_v)^2`.
pub fn disagreement(g: &WeightedGraph, z: &[f64]) -> Result<f64> {
    check_dim(g.node_count(), z.len())?;
    Ok(g.quadratic_form(z))
}

/// Squared norm of an already mean-centered vector.
pub fn polarization(z_bar: &[f64]) -> Result<f64> {
    let sum: f64 = z_bar.iter().sum();
    if sum.abs() > CENTERING_TOL {
        return Err(Error::NotCentered(sum));
    }
    Ok(z_bar.iter().map(|x| x * x).sum())
}

pub fn index(g: &WeightedGraph, s: &OpinionVector) -> Result<EquilibriumReport> {
    EquilibriumSolver::new(g)?.report(s.as_slice())
}

/// Per-node stress `(z*_i - s_i)^2 + sum_{j in N(i)} w_ij (z*_i - z*_j)^2`.
pub fn node_stress(g: &WeightedGraph, s: &OpinionVector, z_star: &[f64]) -> Result<Vec<f64>> {
    check_dim(g.node_count(), s.len())?;
    check_dim(g.node_count(), z_star.len())?;
    let mut stress: Vec<f64> = z_star.iter().zip(s.as_slice()).map(|(z, s)| (z - s).powi(2)).collect();
    for e in g.edges() {
        let d = e.w * (z_star[e.u] - z_star[e.v]).powi(2);
        stress[e.u] += d;
        stress[e.v] += d;
    }
    Ok(stress)
}

/// Holds one factorization of `I + L` for repeated solves on a fixed graph.
pub struct EquilibriumSolver<'g> {
    graph: &'g WeightedGraph,
    factor: ShiftedLaplacian,
}

impl<'g> EquilibriumSolver<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Result<Self> {
        Self::with_solver(graph, SolverKind::Auto)
    }

    pub fn with_solver(graph: &'g WeightedGraph, kind: SolverKind) -> Result<Self> {
        let factor = ShiftedLaplacian::with_solver(graph.laplacian(), kind)?;
        Ok(Self { graph, factor })
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }

    pub fn factor(&self) -> &ShiftedLaplacian {
        &self.factor
    }

    /// `(I + L)^{-1} x` for an arbitrary real vector.
    pub fn equilibrium(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.graph.node_count(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("opinion"));
        }
        Ok(self.factor.solve_slice(x).as_slice().to_vec())
    }

    /// Full report for opinions `x` (not range-checked, so it also serves
    /// shifted opinion vectors).
    pub fn report(&self, x: &[f64]) -> Result<EquilibriumReport> {
        let z_star = self.equilibrium(x)?;
        let z_bar = center(&z_star)?;
        let polarization = z_bar.iter().map(|v| v * v).sum::<f64>();
        let disagreement = self.graph.quadratic_form(&z_star);
        Ok(EquilibriumReport { z_star, z_bar, polarization, disagreement, index: polarization + disagreement })
    }

    /// Closed form `x_bar^T (I + L)^{-1} x_bar`.
    pub fn index_closed_form(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.graph.node_count(), x.len())?;
        let x_bar = centered(&DVector::from_column_slice(x));
        Ok(self.factor.inverse_quadratic_form(&x_bar))
    }
}
