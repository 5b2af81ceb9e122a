//! Preconditioned conjugate gradients for Laplacian and SDD systems.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexVector, WeightedGraph};
use crate::numeric::{axpy, dot, norm, project_out_ones};
use crate::solver::LaplacianSolver;

pub const DEFAULT_REL_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: usize = 1000;

// recurrence residuals drift from the true residual on long solves
const RESIDUAL_REFRESH: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub x: VertexVector,
    pub iterations: usize,
    /// `‖L_G x − b‖ / ‖b‖`, recomputed from `x` at termination. For pure
    /// Laplacians `b` is the projected right-hand side.
    pub relative_residual: f64,
    pub converged: bool,
    /// Relative residual after each iteration, starting with the initial
    /// guess.
    pub residual_history: Vec<f64>,
    /// Mean of the right-hand side removed before solving a singular system;
    /// zero for SDD systems.
    pub projected_component: f64,
}

/// Solves `L_G x = b` with PCG from a zero initial guess, applying the
/// preconditioner through `precond`.
///
/// When `g` has no self weights, `b` is projected orthogonal to the
/// all-ones vector first and the removed mean is reported. Stops once
/// `‖L_G x − b‖ ≤ rel_tol · ‖b‖` or after `max_iters` iterations; running out
/// of iterations is not an error.
pub fn pcg_solve<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    precond: &S,
    b: &[f64],
    rel_tol: f64,
    max_iters: usize,
) -> Result<SolveResult> {
    let n = g.n();
    for got in [b.len(), precond.dim()] {
        if got != n {
            return Err(Error::LengthMismatch { expected: n, got });
        }
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {rel_tol} must be positive"
        )));
    }
    let singular = !g.has_self_weights();
    let mut rhs = b.to_vec();
    let projected_component = if singular {
        project_out_ones(&mut rhs)
    } else {
        0.0
    };
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(SolveResult {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            residual_history: vec![0.0],
            projected_component,
        });
    }

    let mut r = rhs.clone();
    let mut z = precond.solve(&r)?;
    if singular {
        project_out_ones(&mut z);
    }
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut ad = vec![0.0; n];
    let mut history = vec![1.0];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        g.laplacian_apply_into(&d, &mut ad)?;
        let curvature = dot(&d, &ad);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown(iterations + 1));
        }
        let alpha = rz / curvature;
        axpy(alpha, &d, &mut x);
        axpy(-alpha, &ad, &mut r);
        iterations += 1;
        if iterations % RESIDUAL_REFRESH == 0 {
            r = true_residual(g, &x, &rhs)?;
        }
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel <= rel_tol {
            // confirm against the true residual before stopping
            r = true_residual(g, &x, &rhs)?;
            let rel = norm(&r) / bnorm;
            *history.last_mut().unwrap() = rel;
            if rel <= rel_tol {
                converged = true;
                break;
            }
        }
        z = precond.solve(&r)?;
        if singular {
            project_out_ones(&mut z);
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (di, zi) in d.iter_mut().zip(&z) {
            *di = zi + beta * *di;
        }
    }
    if singular {
        project_out_ones(&mut x);
    }
    let relative_residual = norm(&true_residual(g, &x, &rhs)?) / bnorm;
    if let Some(last) = history.last_mut() {
        *last = relative_residual;
    }
    Ok(SolveResult {
        x,
        iterations,
        relative_residual,
        converged,
        residual_history: history,
        projected_component,
    })
}

fn true_residual(g: &WeightedGraph, x: &[f64], b: &[f64]) -> Result<VertexVector> {
    let mut r = g.laplacian_apply(x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(r)
}

/// Iteration bound `⌈½ √κ ln(2/ε)⌉ + 2` for condition number `κ`.
pub fn iteration_bound(kappa: f64, rel_tol: f64) -> usize {
    (0.5 * kappa.sqrt() * (2.0 / rel_tol).ln()).ceil() as usize + 2
}

/// PCG on a fixed graph as a [`LaplacianSolver`], for use as an inner
/// solver. Non-convergence is reported as an error.
pub struct PcgSolver<'a, S: LaplacianSolver + ?Sized> {
    graph: &'a WeightedGraph,
    precond: &'a S,
    rel_tol: f64,
    max_iters: usize,
}

impl<'a, S: LaplacianSolver + ?Sized> PcgSolver<'a, S> {
    pub fn new(graph: &'a WeightedGraph, precond: &'a S, rel_tol: f64, max_iters: usize) -> Self {
        PcgSolver {
            graph,
            precond,
            rel_tol,
            max_iters,
        }
    }
}

impl<S: LaplacianSolver + ?Sized> LaplacianSolver for PcgSolver<'_, S> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        let res = pcg_solve(self.graph, self.precond, b, self.rel_tol, self.max_iters)?;
        if !res.converged {
            return Err(Error::NotConverged {
                iterations: res.iterations,
                residual: res.relative_residual,
            });
        }
        Ok(res.x)
    }
}
