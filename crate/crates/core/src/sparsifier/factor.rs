//! Direct solvers for the sparsifier Laplacian `L_P`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Edge, VertexVector, WeightedGraph};
use crate::numeric::project_out_ones;
use crate::solver::LaplacianSolver;
use crate::tree::SpanningTree;

/// Up to this many recovered edges the tree solve is corrected with a dense
/// Woodbury update instead of a sparse factorization.
pub const WOODBURY_MAX_EDGES: usize = 64;

/// Sparse `L D L^T` factorization of `L_P + ε e_0 e_0^T` (no grounding for
/// SDD matrices with self weights) under a minimum-degree ordering.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    // perm[k] = vertex eliminated at step k
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    // row positions (in elimination order) of the strictly lower part
    row_idx: Vec<usize>,
    values: Vec<f64>,
    pivots: Vec<f64>,
    singular: bool,
}

/// Minimum-degree elimination on an explicit elimination graph. Returns the
/// elimination order and, per step, the uneliminated neighbors at the time
/// of elimination (the column pattern of the factor).
fn minimum_degree(n: usize, edges: &[Edge]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        adj[e.p].push(e.q);
        adj[e.q].push(e.p);
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|v| Reverse((adj[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut patterns = Vec::with_capacity(n);
    let mut merged = Vec::new();
    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            // adj[u] := (adj[u] ∪ nbrs) \ {u, v}, kept sorted
            merged.clear();
            let (a, b) = (&adj[u], &nbrs);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v {
                    merged.push(next);
                }
            }
            let changed = merged.len() != adj[u].len();
            std::mem::swap(&mut adj[u], &mut merged);
            if changed {
                heap.push(Reverse((adj[u].len(), u)));
            }
        }
        order.push(v);
        patterns.push(nbrs);
    }
    (order, patterns)
}

impl SparseCholesky {
    pub fn new(p: &WeightedGraph) -> Result<Self> {
        let n = p.n();
        let singular = !p.has_self_weights();
        let (perm, patterns) = minimum_degree(n, p.edges());
        let mut pos = vec![0usize; n];
        for (k, &v) in perm.iter().enumerate() {
            pos[v] = k;
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for pattern in &patterns {
            let start = row_idx.len();
            row_idx.extend(pattern.iter().map(|&u| pos[u]));
            row_idx[start..].sort_unstable();
            col_ptr.push(row_idx.len());
        }
        let mut values = vec![0.0; row_idx.len()];
        let mut pivots = vec![0.0; n];
        for v in 0..n {
            pivots[pos[v]] = p.diagonal(v);
        }
        if singular {
            pivots[pos[0]] += p.grounding_epsilon();
        }
        let locate = |col: usize, row: usize, row_idx: &[usize]| -> usize {
            let slice = &row_idx[col_ptr[col]..col_ptr[col + 1]];
            col_ptr[col] + slice.binary_search(&row).expect("row in factor pattern")
        };
        for e in p.edges() {
            let (a, b) = (pos[e.p], pos[e.q]);
            let (col, row) = if a < b { (a, b) } else { (b, a) };
            let at = locate(col, row, &row_idx);
            values[at] -= e.w;
        }

        for k in 0..n {
            let d = pivots[k];
            if !(d > 0.0) {
                return Err(Error::NonPositivePivot {
                    vertex: perm[k],
                    pivot: d,
                });
            }
            let (start, end) = (col_ptr[k], col_ptr[k + 1]);
            for a in start..end {
                let i = row_idx[a];
                let va = values[a];
                if va == 0.0 {
                    continue;
                }
                pivots[i] -= va * va / d;
                for b in a + 1..end {
                    let j = row_idx[b];
                    let at = locate(i, j, &row_idx);
                    values[at] -= va * values[b] / d;
                }
            }
            for val in &mut values[start..end] {
                *val /= d;
            }
        }
        Ok(SparseCholesky {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
            pivots,
            singular,
        })
    }

    /// Off-diagonal nonzeros of the factor.
    pub fn factor_nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        if self.singular {
            project_out_ones(b);
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&v| b[v]).collect();
        for k in 0..self.n {
            let yk = y[k];
            if yk != 0.0 {
                for a in self.col_ptr[k]..self.col_ptr[k + 1] {
                    y[self.row_idx[a]] -= self.values[a] * yk;
                }
            }
        }
        for (yk, d) in y.iter_mut().zip(&self.pivots) {
            *yk /= d;
        }
        for k in (0..self.n).rev() {
            let mut s = y[k];
            for a in self.col_ptr[k]..self.col_ptr[k + 1] {
                s -= self.values[a] * y[self.row_idx[a]];
            }
            y[k] = s;
        }
        for (k, &v) in self.perm.iter().enumerate() {
            b[v] = y[k];
        }
        if self.singular {
            project_out_ones(b);
        }
        Ok(())
    }
}

impl LaplacianSolver for SparseCholesky {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Tree solve corrected for a few extra edges by the Woodbury identity:
/// `(M + U W U^T)^{-1} b = M^{-1} (b - U S^{-1} U^T M^{-1} b)` with
/// `S = W^{-1} + U^T M^{-1} U` and `U` holding the edge vectors `e_p - e_q`.
#[derive(Debug, Clone)]
pub struct WoodburySolver {
    tree: SpanningTree,
    edges: Vec<Edge>,
    // dense Cholesky factor of S, row-major lower triangle
    chol: Vec<f64>,
}

impl WoodburySolver {
    pub fn new(tree: SpanningTree, edges: Vec<Edge>) -> Result<Self> {
        let k = edges.len();
        let n = tree.n();
        let mut s = vec![0.0; k * k];
        let mut u = vec![0.0; n];
        for (j, e) in edges.iter().enumerate() {
            u.iter_mut().for_each(|x| *x = 0.0);
            u[e.p] = 1.0;
            u[e.q] = -1.0;
            tree.tree_solve_in_place(&mut u)?;
            for (i, f) in edges.iter().enumerate() {
                s[i * k + j] = u[f.p] - u[f.q];
            }
            s[j * k + j] += 1.0 / e.w;
        }
        for i in 0..k {
            for j in i + 1..k {
                let avg = 0.5 * (s[i * k + j] + s[j * k + i]);
                s[i * k + j] = avg;
                s[j * k + i] = avg;
            }
        }
        // in-place dense Cholesky
        for j in 0..k {
            let mut d = s[j * k + j];
            for m in 0..j {
                d -= s[j * k + m] * s[j * k + m];
            }
            if !(d > 0.0) {
                return Err(Error::NonPositivePivot {
                    vertex: edges[j].p,
                    pivot: d,
                });
            }
            let d = d.sqrt();
            s[j * k + j] = d;
            for i in j + 1..k {
                let mut v = s[i * k + j];
                for m in 0..j {
                    v -= s[i * k + m] * s[j * k + m];
                }
                s[i * k + j] = v / d;
            }
        }
        Ok(WoodburySolver {
            tree,
            edges,
            chol: s,
        })
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }
}

impl LaplacianSolver for WoodburySolver {
    fn dim(&self) -> usize {
        self.tree.n()
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        let k = self.edges.len();
        let mut y = self.tree.tree_solve(b)?;
        if k == 0 {
            return Ok(y);
        }
        let mut c: Vec<f64> = self.edges.iter().map(|e| y[e.p] - y[e.q]).collect();
        for i in 0..k {
            let mut v = c[i];
            for m in 0..i {
                v -= self.chol[i * k + m] * c[m];
            }
            c[i] = v / self.chol[i * k + i];
        }
        for i in (0..k).rev() {
            let mut v = c[i];
            for m in i + 1..k {
                v -= self.chol[m * k + i] * c[m];
            }
            c[i] = v / self.chol[i * k + i];
        }
        y.copy_from_slice(b);
        for (e, d) in self.edges.iter().zip(&c) {
            y[e.p] -= d;
            y[e.q] += d;
        }
        self.tree.tree_solve_in_place(&mut y)?;
        Ok(y)
    }
}

/// Factorization state of a sparsifier Laplacian.
#[derive(Debug, Clone)]
pub enum Preconditioner {
    Tree(SpanningTree),
    Woodbury(WoodburySolver),
    Cholesky(SparseCholesky),
}

impl Preconditioner {
    /// Picks the cheapest exact solver for tree plus `extra` edges.
    pub fn build(
        tree: &SpanningTree,
        extra: &[Edge],
        subgraph: impl FnOnce() -> Result<WeightedGraph>,
    ) -> Result<Self> {
        if extra.is_empty() {
            Ok(Preconditioner::Tree(tree.clone()))
        } else if extra.len() <= WOODBURY_MAX_EDGES {
            Ok(Preconditioner::Woodbury(WoodburySolver::new(
                tree.clone(),
                extra.to_vec(),
            )?))
        } else {
            Ok(Preconditioner::Cholesky(SparseCholesky::new(&subgraph()?)?))
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Preconditioner::Tree(_) => "tree",
            Preconditioner::Woodbury(_) => "woodbury",
            Preconditioner::Cholesky(_) => "cholesky",
        }
    }

    /// Off-diagonal nonzeros of the sparse factor, when there is one.
    pub fn factor_nnz(&self) -> Option<usize> {
        match self {
            Preconditioner::Cholesky(c) => Some(c.factor_nnz()),
            _ => None,
        }
    }
}

impl LaplacianSolver for Preconditioner {
    fn dim(&self) -> usize {
        match self {
            Preconditioner::Tree(t) => t.n(),
            Preconditioner::Woodbury(w) => w.dim(),
            Preconditioner::Cholesky(c) => c.dim(),
        }
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        match self {
            Preconditioner::Tree(t) => t.tree_solve(b),
            Preconditioner::Woodbury(w) => w.solve(b),
            Preconditioner::Cholesky(c) => c.solve(b),
        }
    }
}
