//! Solves with the shifted Laplacian `I + L`, whose eigenvalues are all at
//! least 1. Dense Cholesky is used below `AUTO_CG_THRESHOLD` nodes,
//! conjugate gradients above it.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Node count above which [`SolverKind::Auto`] switches to conjugate gradients.
pub const AUTO_CG_THRESHOLD: usize = 5000;

/// Relative residual target of the conjugate-gradient path.
pub const CG_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Auto,
    Cholesky,
    ConjugateGradient,
}

enum Backend {
    Cholesky(Cholesky<f64, Dyn>),
    Cg,
}

/// Factorized (or CG-ready) `I + L`.
pub struct ShiftedLaplacian {
    matrix: DMatrix<f64>,
    backend: Backend,
}

impl ShiftedLaplacian {
    pub fn new(laplacian: DMatrix<f64>) -> Result<Self> {
        Self::with_solver(laplacian, SolverKind::Auto)
    }

    pub fn with_solver(laplacian: DMatrix<f64>, kind: SolverKind) -> Result<Self> {
        if laplacian.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("laplacian entry"));
        }
        let n = laplacian.nrows();
        let mut matrix = laplacian;
        for i in 0..n {
            matrix[(i, i)] += 1.0;
        }
        let use_cg = match kind {
            SolverKind::Auto => n > AUTO_CG_THRESHOLD,
            SolverKind::Cholesky => false,
            SolverKind::ConjugateGradient => true,
        };
        let backend = if use_cg {
            Backend::Cg
        } else {
            Backend::Cholesky(Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite)?)
        };
        Ok(Self { matrix, backend })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The matrix `I + L`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Returns `(I + L)^{-1} rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.backend {
            Backend::Cholesky(chol) => chol.solve(rhs),
            Backend::Cg => conjugate_gradient(&self.matrix, rhs, CG_REL_TOL, 10 * self.dim() + 100),
        }
    }

    pub fn solve_slice(&self, rhs: &[f64]) -> DVector<f64> {
        self.solve(&DVector::from_column_slice(rhs))
    }

    /// `x^T (I + L)^{-1} x`.
    pub fn inverse_quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.solve(x))
    }
}

/// Plain conjugate gradients for an SPD matrix, stopping once
/// `||b - Ax|| <= rel_tol * ||b||`.
pub fn conjugate_gradient(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64, max_iters: usize) -> DVector<f64> {
    let mut x = DVector::zeros(b.len());
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return x;
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for _ in 0..max_iters {
        if rr.sqrt() <= rel_tol * b_norm {
            break;
        }
        let ap = a * &p;
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.dot(&r);
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    x
}

/// Arithmetic mean, exact when every entry is equal.
pub fn mean(x: &[f64]) -> f64 {
    match x.first() {
        Some(&first) if x.iter().all(|&v| v == first) => first,
        _ => x.iter().sum::<f64>() / x.len() as f64,
    }
}

/// Subtracts the mean from every entry.
pub fn centered(x: &DVector<f64>) -> DVector<f64> {
    let mean = mean(x.as_slice());
    x.map(|v| v - mean)
}
