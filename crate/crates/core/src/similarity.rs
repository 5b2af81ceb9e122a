//! Extreme generalized eigenvalues of `(L_G, L_P)` and the similarity-aware
//! heat threshold.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numeric::{dot, norm, project_out_ones, scale};
use crate::oracle::{symmetric_definite_eigs, DenseMatrix};
use crate::rng::{self, Purpose};
use crate::solver::LaplacianSolver;

pub const DEFAULT_LAMBDA_MAX_ITERS: usize = 10;
pub const DEFAULT_LAMBDA_MAX_TOL: f64 = 1e-3;
/// Vectors in the subspace iteration behind [`SimilarityEstimate`].
pub const DEFAULT_BLOCK_SIZE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityEstimate {
    pub lambda_max_est: f64,
    pub lambda_min_est: f64,
    pub sigma2_est: f64,
    pub iterations_used: usize,
}

impl SimilarityEstimate {
    /// Runs both estimators for the pencil `(L_G, L_P)`, where `p` is a
    /// subgraph of `g` with the same self weights.
    pub fn compute<S: LaplacianSolver + ?Sized>(
        g: &WeightedGraph,
        p: &WeightedGraph,
        solver: &S,
        max_iters: usize,
        rel_tol: f64,
        seed: u64,
    ) -> Result<Self> {
        let x0 = random_block(g, seed, DEFAULT_BLOCK_SIZE);
        Ok(Self::compute_from(g, p, solver, x0, max_iters, rel_tol)?.0)
    }

    /// Like [`SimilarityEstimate::compute`] with an explicit start block;
    /// also returns the final Ritz vectors for warm starts.
    pub fn compute_from<S: LaplacianSolver + ?Sized>(
        g: &WeightedGraph,
        p: &WeightedGraph,
        solver: &S,
        x0: Vec<Vec<f64>>,
        max_iters: usize,
        rel_tol: f64,
    ) -> Result<(Self, Vec<Vec<f64>>)> {
        if p.m() == g.m() && p.n() == g.n() && p.self_weights() == g.self_weights() {
            // a subgraph with every edge is the graph itself
            let est = SimilarityEstimate {
                lambda_max_est: 1.0,
                lambda_min_est: 1.0,
                sigma2_est: 1.0,
                iterations_used: 0,
            };
            return Ok((est, x0));
        }
        let run = estimate_lambda_max_block(g, p, solver, x0, max_iters, rel_tol)?;
        let lmin = estimate_lambda_min(g, p)?;
        // both are estimates: keep the invariants λ_max ≥ λ_min ≥ 1
        let lambda_min_est = lmin.max(1.0);
        let lambda_max_est = run.value.max(lambda_min_est);
        let est = SimilarityEstimate {
            lambda_max_est,
            lambda_min_est,
            sigma2_est: lambda_max_est / lambda_min_est,
            iterations_used: run.iterations,
        };
        Ok((est, run.block))
    }
}

/// Result of [`estimate_lambda_max_block`].
#[derive(Debug, Clone)]
pub struct LambdaMaxRun {
    pub value: f64,
    pub iterations: usize,
    /// Ritz vectors of the last iterate, unit length, largest Ritz value
    /// first.
    pub block: Vec<Vec<f64>>,
}

/// Uniform start vector in `[-1, 1)^n`. A continuous start avoids landing
/// exactly on a low eigenvector, which ±1 vectors do on small symmetric
/// graphs.
pub fn random_start(g: &WeightedGraph, seed: u64) -> Vec<f64> {
    random_column(g.n(), seed, 0)
}

/// `size` independent uniform start vectors; the first is
/// [`random_start`].
pub fn random_block(g: &WeightedGraph, seed: u64, size: usize) -> Vec<Vec<f64>> {
    (0..size.max(1))
        .map(|j| random_column(g.n(), seed, j as u64))
        .collect()
}

fn random_column(n: usize, seed: u64, j: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, Purpose::LambdaMax, 0, j);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Rademacher vector, projected orthogonal to the all-ones vector for
/// singular Laplacians.
pub(crate) fn rademacher(n: usize, singular: bool, rng: &mut impl Rng) -> Vec<f64> {
    let mut h: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    if singular {
        project_out_ones(&mut h);
    }
    h
}

/// Generalized power iteration with Rayleigh-quotient readout
/// `λ = h^T L_G h / h^T L_P h` from a seeded random start. Returns the
/// estimate and the number of iterations taken.
pub fn estimate_lambda_max<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    p: &WeightedGraph,
    solver: &S,
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    let run = estimate_lambda_max_block(
        g,
        p,
        solver,
        vec![random_start(g, seed)],
        max_iters,
        rel_tol,
    )?;
    Ok((run.value, run.iterations))
}

/// Block iteration for the top of the pencil. Each step solves
/// `L_P Y = L_G X` and runs Rayleigh–Ritz on `(L_G, L_P)` over the span of
/// `Y`, `X` and the previous block, keeping the top `|X|` Ritz vectors.
/// The largest Ritz value is the estimate; it never decreases from step to
/// step and never exceeds the true `λ_max`. Stops when successive estimates
/// differ by less than `rel_tol` or after `max_iters` steps.
pub fn estimate_lambda_max_block<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    p: &WeightedGraph,
    solver: &S,
    x0: Vec<Vec<f64>>,
    max_iters: usize,
    rel_tol: f64,
) -> Result<LambdaMaxRun> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument(
            "max_iters must be at least 1".into(),
        ));
    }
    if x0.is_empty() {
        return Err(Error::InvalidArgument("empty start block".into()));
    }
    let n = g.n();
    for got in [p.n(), solver.dim()]
        .into_iter()
        .chain(x0.iter().map(Vec::len))
    {
        if got != n {
            return Err(Error::LengthMismatch { expected: n, got });
        }
    }
    let size = x0.len();
    let singular = !g.has_self_weights();
    let (mut lambda, mut x) = rayleigh_ritz(g, p, x0, size, singular)?;
    let mut prev: Vec<Vec<f64>> = Vec::new();
    for it in 1..=max_iters {
        let mut span = Vec::with_capacity(3 * size);
        for col in &x {
            span.push(solver.solve(&g.laplacian_apply(col)?)?);
        }
        span.extend(x.iter().cloned());
        span.append(&mut prev);
        let (estimate, next) = rayleigh_ritz(g, p, span, size, singular)?;
        let change = (estimate - lambda).abs() / estimate.abs();
        lambda = estimate;
        prev = std::mem::replace(&mut x, next);
        if change < rel_tol || it == max_iters {
            return Ok(LambdaMaxRun {
                value: lambda,
                iterations: it,
                block: x,
            });
        }
    }
    unreachable!()
}

// Orthonormalizes the columns (dropping dependent ones), then returns the
// largest Ritz value of the pencil on their span and the top `keep` Ritz
// vectors.
fn rayleigh_ritz(
    g: &WeightedGraph,
    p: &WeightedGraph,
    mut cols: Vec<Vec<f64>>,
    keep: usize,
    singular: bool,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut v in cols.drain(..) {
        if singular {
            project_out_ones(&mut v);
        }
        let before = norm(&v);
        let mut len = before;
        // a second pass only when the first cancelled most of the column
        for _ in 0..2 {
            let start = len;
            for u in &basis {
                let c = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
            len = norm(&v);
            if len > 0.5 * start {
                break;
            }
        }
        if len > 1e-10 * before && len > 0.0 {
            scale(&mut v, 1.0 / len);
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return Err(Error::InvalidArgument(
            "start vector has no component orthogonal to ones".into(),
        ));
    }
    let k = basis.len();
    let gb: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| g.laplacian_apply(v))
        .collect::<Result<_>>()?;
    let pb: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| p.laplacian_apply(v))
        .collect::<Result<_>>()?;
    let mut a = DenseMatrix::zeros(k);
    let mut b = DenseMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let aij = dot(&basis[i], &gb[j]);
            let bij = dot(&basis[i], &pb[j]);
            a.set(i, j, aij);
            a.set(j, i, aij);
            b.set(i, j, bij);
            b.set(j, i, bij);
        }
    }
    let (values, vectors, _) = symmetric_definite_eigs(&a, &b)?;
    let ritz = vectors
        .iter()
        .take(keep)
        .map(|c| {
            let mut v = vec![0.0; g.n()];
            for (coef, u) in c.iter().zip(&basis) {
                v.iter_mut().zip(u).for_each(|(a, b)| *a += coef * b);
            }
            let len = norm(&v);
            scale(&mut v, 1.0 / len);
            v
        })
        .collect();
    Ok((values[0], ritz))
}

/// `min_p L_G(p,p) / L_P(p,p)`, an upper bound on the smallest generalized
/// eigenvalue.
pub fn estimate_lambda_min(g: &WeightedGraph, p: &WeightedGraph) -> Result<f64> {
    if g.n() != p.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    Ok((0..g.n())
        .map(|v| g.diagonal(v) / p.diagonal(v))
        .fold(f64::INFINITY, f64::min))
}

/// Normalized-heat cutoff `(σ² λ_min / λ_max)^(2t+1)`, clamped to `(0, 1]`.
pub fn heat_threshold(
    target_sigma2: f64,
    lambda_min_est: f64,
    lambda_max_est: f64,
    t: usize,
) -> f64 {
    let ratio = target_sigma2 * lambda_min_est / lambda_max_est;
    if ratio >= 1.0 {
        return 1.0;
    }
    ratio.powi(2 * t as i32 + 1).clamp(f64::MIN_POSITIVE, 1.0)
}

/// `⌈2 λ_max / λ̃_max - 1⌉`, floored at zero. Advisory only.
pub fn unique_edge_budget(lambda_max: f64, target_lambda_max: f64) -> usize {
    let k = (2.0 * lambda_max / target_lambda_max - 1.0).ceil();
    if k > 0.0 {
        k as usize
    } else {
        0
    }
}
