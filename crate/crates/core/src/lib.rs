//! Opinion-dynamics optimization on weighted graphs.
//!
//! Computes Friedkin-Johnsen equilibria and the polarization-disagreement
//! index, minimizes the index over edge weights with a fixed total
//! ([`topology`]) or over budgeted decreases of the innate opinions
//! ([`intervention`]), and sparsifies dense optima by effective-resistance
//! sampling ([`sparsify`]).

pub mod dynamics;
pub mod error;
pub mod generators;
pub mod graph;
pub mod intervention;
pub mod linalg;
pub mod optim;
pub mod sparsify;
pub mod topology;

pub use dynamics::{EquilibriumReport, EquilibriumSolver, OpinionVector};
pub use error::{Error, Result};
pub use generators::Seed;
pub use graph::{Edge, EdgeWeightVector, WeightedGraph};
pub use intervention::{InterventionProblem, InterventionResult};
pub use optim::{LineSearch, OptimizerConfig};
pub use sparsify::{Sparsified, SparsifyConfig};
pub use topology::{TopologyProblem, TopologySolution};
