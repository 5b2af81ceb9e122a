//! Common interface for anything that applies an (approximate) inverse of a
//! graph Laplacian.

use crate::error::Result;
use crate::graph::VertexVector;
use crate::tree::SpanningTree;

/// Applies `L^+ b` (or `L^{-1} b` for nonsingular SDD systems).
///
/// Implementations for singular Laplacians return vectors orthogonal to the
/// all-ones vector. Solvers are immutable after construction and can be
/// shared between threads.
pub trait LaplacianSolver: Send + Sync {
    fn dim(&self) -> usize;

    fn solve(&self, b: &[f64]) -> Result<VertexVector>;
}

impl LaplacianSolver for SpanningTree {
    fn dim(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        self.tree_solve(b)
    }
}

impl<S: LaplacianSolver + ?Sized> LaplacianSolver for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        (**self).solve(b)
    }
}
