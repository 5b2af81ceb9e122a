//! Spectral bipartitioning by the sign pattern of an approximate Fiedler
//! vector.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexVector, WeightedGraph};
use crate::numeric::{norm, project_out_ones, scale};
use crate::pcg::PcgSolver;
use crate::rng::{self, Purpose, DEFAULT_SEED};
use crate::solver::LaplacianSolver;
use crate::sparsifier::SparseCholesky;

pub const DEFAULT_FIEDLER_ITERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiedlerConfig {
    /// Inverse power iterations.
    pub iters: usize,
    /// Relative residual for each inner PCG solve.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub seed: u64,
}

impl Default for FiedlerConfig {
    fn default() -> Self {
        FiedlerConfig {
            iters: DEFAULT_FIEDLER_ITERS,
            inner_tol: 1e-6,
            inner_max_iters: 2000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiedlerRun {
    /// Unit length, orthogonal to the all-ones vector.
    pub vector: VertexVector,
    /// Rayleigh quotient on `L_G` of the start vector and of each iterate.
    pub rayleigh_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionResult {
    /// `+1` or `-1` per vertex.
    pub signs: Vec<i8>,
    /// `|V+| / |V-|`; infinite when every vertex is positive.
    pub balance_ratio: f64,
    /// Total weight of edges between the two sides.
    pub cut_weight: f64,
    pub fiedler_estimate: VertexVector,
}

/// Fiedler start vector, uniform in `[-1, 1)` and projected.
pub fn fiedler_start(n: usize, seed: u64) -> VertexVector {
    let mut rng = rng::stream(seed, Purpose::Fiedler, 0, 0);
    let mut x: VertexVector = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out_ones(&mut x);
    x
}

/// A few inverse power iterations on `L_G`, each an inner PCG solve
/// preconditioned by `precond`. The all-ones direction is removed after
/// every step.
pub fn fiedler_approx<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    precond: &S,
    cfg: &FiedlerConfig,
) -> Result<FiedlerRun> {
    let inner = PcgSolver::new(g, precond, cfg.inner_tol, cfg.inner_max_iters);
    inverse_power(g, &inner, cfg.iters, cfg.seed)
}

/// The reference Fiedler estimate: the same start vector and iteration
/// count as [`fiedler_approx`], with exact sparse Cholesky solves on `L_G`.
pub fn fiedler_direct(g: &WeightedGraph, cfg: &FiedlerConfig) -> Result<FiedlerRun> {
    let chol = SparseCholesky::new(g)?;
    inverse_power(g, &chol, cfg.iters, cfg.seed)
}

fn inverse_power<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    solver: &S,
    iters: usize,
    seed: u64,
) -> Result<FiedlerRun> {
    if iters == 0 {
        return Err(Error::InvalidArgument(
            "at least one inverse power iteration is required".into(),
        ));
    }
    if g.has_self_weights() {
        return Err(Error::InvalidArgument(
            "Fiedler vectors need a pure Laplacian".into(),
        ));
    }
    if solver.dim() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: solver.dim(),
        });
    }
    let mut x = fiedler_start(g.n(), seed);
    let s = 1.0 / norm(&x);
    scale(&mut x, s);
    let mut history = vec![g.quadratic_form(&x)?];
    for _ in 0..iters {
        let mut y = solver.solve(&x)?;
        project_out_ones(&mut y);
        let len = norm(&y);
        if !(len > 0.0) {
            return Err(Error::InvalidArgument(
                "inverse iteration collapsed to zero".into(),
            ));
        }
        scale(&mut y, 1.0 / len);
        history.push(g.quadratic_form(&y)?);
        x = y;
    }
    Ok(FiedlerRun {
        vector: x,
        rayleigh_history: history,
    })
}

/// Partition by sign, zero counting as positive.
pub fn sign_cut(g: &WeightedGraph, v: &[f64]) -> Result<PartitionResult> {
    if v.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: v.len(),
        });
    }
    let signs: Vec<i8> = v.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect();
    let plus = signs.iter().filter(|&&s| s > 0).count();
    let minus = signs.len() - plus;
    let cut_weight = g
        .edges()
        .iter()
        .filter(|e| signs[e.p] != signs[e.q])
        .map(|e| e.w)
        .sum();
    Ok(PartitionResult {
        signs,
        balance_ratio: plus as f64 / minus as f64,
        cut_weight,
        fiedler_estimate: v.to_vec(),
    })
}

/// Fraction of vertices on different sides, minimized over a global flip.
pub fn partition_disagreement(a: &PartitionResult, b: &PartitionResult) -> Result<f64> {
    let n = a.signs.len();
    if b.signs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.signs.len(),
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let differ = a.signs.iter().zip(&b.signs).filter(|(x, y)| x != y).count();
    Ok(differ.min(n - differ) as f64 / n as f64)
}
