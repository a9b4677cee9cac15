//! Projected gradient descent with Armijo backtracking, shared by the
//! topology and opinion optimizers.
//!
//! The first trial step is `LineSearch::initial_step`; later iterations try
//! the Barzilai-Borwein step `<dx, dx> / <dx, dg>` and backtrack from there.
//! Every accepted step satisfies the Armijo condition against the current
//! objective, so the objective sequence is non-increasing.
//!
//! Convergence needs both a relative decrease below `rel_tol` and a
//! caller-supplied first-order check on `(x, grad)`; a small decrease alone
//! happens on flat stretches well before optimality.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self { initial_step: 1.0, shrink: 0.5, sufficient_decrease: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop when `(f_k - f_{k+1}) / |f_k| < rel_tol`.
    pub rel_tol: f64,
    pub line_search: LineSearch,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_iters: 5000, rel_tol: 1e-8, line_search: LineSearch::default(), seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let ok = self.max_iters > 0
            && self.rel_tol > 0.0
            && ls.initial_step > 0.0
            && ls.shrink > 0.0
            && ls.shrink < 1.0
            && ls.sufficient_decrease > 0.0;
        if !ok {
            return Err(Error::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iteration, starting with the initial point.
    pub history: Vec<f64>,
}

const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;
const MAX_BACKTRACKS: usize = 80;

/// Minimizes over a convex set given its Euclidean projection. `x0` must be
/// feasible. `stationary(x, grad)` is the first-order test; `observer` sees
/// every accepted iterate.
pub fn projected_gradient<E, P, S>(
    x0: Vec<f64>,
    config: &OptimizerConfig,
    mut eval: E,
    project: P,
    stationary: S,
    observer: &mut dyn FnMut(&[f64], f64),
) -> Result<Outcome>
where
    E: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    P: Fn(&[f64]) -> Vec<f64>,
    S: Fn(&[f64], &[f64]) -> bool,
{
    config.validate()?;
    let ls = config.line_search;
    let mut x = x0;
    let (mut f, mut g) = eval(&x)?;
    let mut history = vec![f];
    observer(&x, f);
    let mut step = ls.initial_step;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let mut t = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let y = project(&trial);
            let slope: f64 = y.iter().zip(&x).zip(&g).map(|((yi, xi), gi)| gi * (yi - xi)).sum();
            if y == x || slope >= 0.0 {
                // projected gradient vanishes: stationary point
                break;
            }
            let (fy, gy) = eval(&y)?;
            if fy <= f + ls.sufficient_decrease * slope {
                accepted = Some((y, fy, gy));
                break;
            }
            t *= ls.shrink;
        }
        let Some((y, fy, gy)) = accepted else {
            // no representable descent along the projected gradient
            converged = stationary(&x, &g);
            break;
        };

        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..x.len() {
            let dx = y[i] - x[i];
            ss += dx * dx;
            sy += dx * (gy[i] - g[i]);
        }
        step = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX };

        let decrease = f - fy;
        let scale = f.abs().max(f64::MIN_POSITIVE);
        x = y;
        f = fy;
        g = gy;
        history.push(f);
        observer(&x, f);
        if decrease / scale < config.rel_tol && stationary(&x, &g) {
            converged = true;
            break;
        }
    }

    Ok(Outcome { x, objective: f, gradient: g, iterations, converged, history })
}
