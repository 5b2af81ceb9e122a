//! Brute-force dense references for small graphs.
//!
//! Everything here is `O(n^3)` and guarded to `n <= 2000`. It exists to
//! check the sparse, iterative code paths: generalized spectra of the pencil
//! `(L_G, L_P)`, `Tr(L_P^+ L_G)`, and exact Laplacian pseudoinverse solves.
//!
//! Singular pencils are reduced by grounding vertex 0 (deleting its row and
//! column). Both quadratic forms are invariant under adding constants, so the
//! grounded pencil has exactly the nonzero generalized eigenvalues of the
//! original on the all-ones-orthogonal subspace.

use crate::error::{Error, Result};
use crate::graph::{VertexVector, WeightedGraph};
use crate::numeric::project_out_ones;
use crate::solver::LaplacianSolver;

pub const MAX_ORACLE_VERTICES: usize = 2000;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the full Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn without_first(&self) -> DenseMatrix {
        let m = self.n - 1;
        let mut out = DenseMatrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, self.get(i + 1, j + 1));
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::SizeGuard {
            n,
            limit: MAX_ORACLE_VERTICES,
        });
    }
    Ok(())
}

/// Dense Laplacian (including self weights on the diagonal).
pub fn dense_laplacian(g: &WeightedGraph) -> Result<DenseMatrix> {
    guard(g.n())?;
    let mut l = DenseMatrix::zeros(g.n());
    for v in 0..g.n() {
        l.set(v, v, g.self_weights()[v]);
    }
    for e in g.edges() {
        l.add(e.p, e.p, e.w);
        l.add(e.q, e.q, e.w);
        l.add(e.p, e.q, -e.w);
        l.add(e.q, e.p, -e.w);
    }
    Ok(l)
}

/// Lower-triangular Cholesky factor `C` with `A = C C^T`.
fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.n;
    let mut c = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= c.get(j, k).powi(2);
        }
        if !(d > 0.0) {
            return Err(Error::NonPositivePivot {
                vertex: j,
                pivot: d,
            });
        }
        let d = d.sqrt();
        c.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= c.get(i, k) * c.get(j, k);
            }
            c.set(i, j, s / d);
        }
    }
    Ok(c)
}

// Solves C y = b in place.
fn forward(c: &DenseMatrix, b: &mut [f64]) {
    for i in 0..c.n {
        let mut s = b[i];
        for k in 0..i {
            s -= c.get(i, k) * b[k];
        }
        b[i] = s / c.get(i, i);
    }
}

// Solves C^T y = b in place.
fn backward(c: &DenseMatrix, b: &mut [f64]) {
    for i in (0..c.n).rev() {
        let mut s = b[i];
        for k in i + 1..c.n {
            s -= c.get(k, i) * b[k];
        }
        b[i] = s / c.get(i, i);
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (unsorted) and eigenvectors as columns of `V`,
/// together with the final off-diagonal to Frobenius norm ratio.
pub fn jacobi_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix, f64) {
    let n = a.n;
    let mut a = a.clone();
    // rotations act on rows of the transpose, which are contiguous
    let mut vt = DenseMatrix::zeros(n);
    for i in 0..n {
        vt.set(i, i, 1.0);
    }
    let fro = a.frobenius();
    let mut ratio = if fro == 0.0 {
        0.0
    } else {
        a.off_diagonal_norm() / fro
    };
    for _ in 0..MAX_SWEEPS {
        if ratio <= JACOBI_TOLERANCE {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                {
                    let (rp, rq) = two_rows(&mut a.data, n, p, q);
                    rotate(rp, rq, c, s);
                }
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k != p && k != q {
                        let (akp, akq) = (a.data[p * n + k], a.data[q * n + k]);
                        a.data[k * n + p] = akp;
                        a.data[k * n + q] = akq;
                    }
                }
                let (vp, vq) = two_rows(&mut vt.data, n, p, q);
                rotate(vp, vq, c, s);
            }
        }
        ratio = a.off_diagonal_norm() / fro;
    }
    let values = (0..n).map(|i| a.get(i, i)).collect();
    let mut v = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            v.set(i, j, vt.get(j, i));
        }
    }
    (values, v, ratio)
}

fn two_rows(data: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

// (x, y) <- (c x - s y, s x + c y), elementwise
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (u, w) = (*a, *b);
        *a = c * u - s * w;
        *b = s * u + c * w;
    }
}

/// Generalized spectrum of `L_G u = λ L_P u`.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `L_P`-orthonormal, matching `eigenvalues` by position.
    pub eigenvectors: Vec<VertexVector>,
    /// Off-diagonal mass left by Jacobi relative to the matrix norm.
    pub residual_ratio: f64,
}

impl DenseSpectrum {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

fn singular_pencil(g: &WeightedGraph, p: &WeightedGraph) -> bool {
    !(g.has_self_weights() && p.has_self_weights())
}

/// Solves `A y = λ B y` for symmetric `A` and positive definite `B`.
/// Returns descending eigenvalues, `B`-orthonormal eigenvectors and the
/// Jacobi off-diagonal ratio.
pub fn symmetric_definite_eigs(
    a: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let m = a.n;
    if b.n != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: b.n,
        });
    }
    let c = cholesky(b)?;
    // M = C^{-1} A C^{-T}
    let mut x = DenseMatrix::zeros(m);
    let mut col = vec![0.0; m];
    for j in 0..m {
        for i in 0..m {
            col[i] = a.get(i, j);
        }
        forward(&c, &mut col);
        for i in 0..m {
            x.set(i, j, col[i]);
        }
    }
    let mut reduced = DenseMatrix::zeros(m);
    for i in 0..m {
        col.copy_from_slice(x.row(i));
        forward(&c, &mut col);
        for j in 0..m {
            reduced.set(j, i, col[j]);
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let s = 0.5 * (reduced.get(i, j) + reduced.get(j, i));
            reduced.set(i, j, s);
            reduced.set(j, i, s);
        }
    }
    let (values, vectors, residual_ratio) = jacobi_eigen(&reduced);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = Vec::with_capacity(m);
    for k in order {
        eigenvalues.push(values[k]);
        let mut y: Vec<f64> = (0..m).map(|i| vectors.get(i, k)).collect();
        backward(&c, &mut y);
        eigenvectors.push(y);
    }
    Ok((eigenvalues, eigenvectors, residual_ratio))
}

/// Dense generalized eigen-decomposition of the pencil `(L_G, L_P)`.
pub fn dense_generalized_eigs(g: &WeightedGraph, p: &WeightedGraph) -> Result<DenseSpectrum> {
    if g.n() != p.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    let n = g.n();
    let singular = singular_pencil(g, p);
    let mut a = dense_laplacian(g)?;
    let mut b = dense_laplacian(p)?;
    if singular {
        a = a.without_first();
        b = b.without_first();
    }
    let (eigenvalues, vectors, residual_ratio) = symmetric_definite_eigs(&a, &b)?;
    let eigenvectors = vectors
        .into_iter()
        .map(|y| {
            if singular {
                let mut u = Vec::with_capacity(n);
                u.push(0.0);
                u.extend(y);
                project_out_ones(&mut u);
                u
            } else {
                y
            }
        })
        .collect();
    Ok(DenseSpectrum {
        eigenvalues,
        eigenvectors,
        residual_ratio,
    })
}

fn invert_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.n;
    let c = cholesky(a)?;
    let mut inv = DenseMatrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|x| *x = 0.0);
        col[j] = 1.0;
        forward(&c, &mut col);
        backward(&c, &mut col);
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv)
}

/// Dense `L^+` (or `L^{-1}` for nonsingular SDD matrices).
///
/// For a connected Laplacian, `L^+ = (L + J/n)^{-1} - J/n` with `J` the
/// all-ones matrix.
pub fn dense_pseudoinverse(g: &WeightedGraph) -> Result<DenseMatrix> {
    let n = g.n();
    let mut l = dense_laplacian(g)?;
    if g.has_self_weights() {
        return invert_spd(&l);
    }
    let shift = 1.0 / n as f64;
    for x in l.data.iter_mut() {
        *x += shift;
    }
    let mut inv = invert_spd(&l)?;
    for x in inv.data.iter_mut() {
        *x -= shift;
    }
    Ok(inv)
}

/// `Tr(L_P^+ L_G)` through an explicit dense pseudoinverse.
pub fn dense_trace_ratio(g: &WeightedGraph, p: &WeightedGraph) -> Result<f64> {
    if g.n() != p.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    let pinv = dense_pseudoinverse(p)?;
    let lg = dense_laplacian(g)?;
    let mut trace = 0.0;
    for i in 0..g.n() {
        for j in 0..g.n() {
            trace += pinv.get(i, j) * lg.get(j, i);
        }
    }
    Ok(trace)
}

/// Eigenpairs of `L_G` itself, ascending.
pub fn dense_laplacian_eigs(g: &WeightedGraph) -> Result<(Vec<f64>, Vec<VertexVector>)> {
    let l = dense_laplacian(g)?;
    let (values, vectors, _) = jacobi_eigen(&l);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vals = order.iter().map(|&k| values[k]).collect();
    let vecs = order
        .iter()
        .map(|&k| (0..g.n()).map(|i| vectors.get(i, k)).collect())
        .collect();
    Ok((vals, vecs))
}

/// Exact solver backed by a dense pseudoinverse.
#[derive(Debug, Clone)]
pub struct DenseSolver {
    pinv: DenseMatrix,
    singular: bool,
}

impl DenseSolver {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Ok(DenseSolver {
            pinv: dense_pseudoinverse(g)?,
            singular: !g.has_self_weights(),
        })
    }
}

impl LaplacianSolver for DenseSolver {
    fn dim(&self) -> usize {
        self.pinv.n
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        if b.len() != self.pinv.n {
            return Err(Error::LengthMismatch {
                expected: self.pinv.n,
                got: b.len(),
            });
        }
        let mut x = self.pinv.mul_vec(b);
        if self.singular {
            project_out_ones(&mut x);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate;
    use crate::numeric::{dot, norm, rel_diff};
    use crate::tree::max_weight;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn path_tree() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn identical_pencil_has_unit_spectrum() {
        let g = generate::random_connected(30, 4.0, 1).unwrap();
        let s = dense_generalized_eigs(&g, &g).unwrap();
        assert_eq!(s.eigenvalues.len(), 29);
        assert!(s.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-10));
        let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let s = dense_generalized_eigs(&star, &star).unwrap();
        assert!(s.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-10));
    }

    #[test]
    fn triangle_over_path() {
        let s = dense_generalized_eigs(&triangle(), &path_tree()).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
        let tr = dense_trace_ratio(&triangle(), &path_tree()).unwrap();
        assert!((tr - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_invariants() {
        let g = generate::random_connected(60, 5.0, 3).unwrap();
        let t = max_weight(&g).unwrap().to_graph(&g).unwrap();
        let s = dense_generalized_eigs(&g, &t).unwrap();
        assert!(s.residual_ratio <= JACOBI_TOLERANCE);
        let sum: f64 = s.eigenvalues.iter().sum();
        let tr = dense_trace_ratio(&g, &t).unwrap();
        assert!(rel_diff(sum, tr) < 1e-8);
        assert!(s.lambda_min() >= 1.0 - 1e-8);
        for (i, u) in s.eigenvectors.iter().enumerate() {
            let lu = g.laplacian_apply(u).unwrap();
            let pu = t.laplacian_apply(u).unwrap();
            let r: Vec<f64> = lu
                .iter()
                .zip(&pu)
                .map(|(a, b)| a - s.eigenvalues[i] * b)
                .collect();
            assert!(norm(&r) <= 1e-8 * norm(&lu));
            for (j, v) in s.eigenvectors.iter().enumerate().take(5) {
                let ip = dot(v, &pu);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn trace_ratio_of_tree_with_itself() {
        let t = generate::random_tree(40, 2).unwrap();
        assert!((dense_trace_ratio(&t, &t).unwrap() - 39.0).abs() < 1e-9);
    }

    #[test]
    fn sdd_pencil_keeps_all_eigenvalues() {
        let g = WeightedGraph::with_self_weights(
            3,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
            vec![1.0, 0.0, 0.0],
        )
        .unwrap();
        let p = max_weight(&g).unwrap().to_graph(&g).unwrap();
        let s = dense_generalized_eigs(&g, &p).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        assert!(s.lambda_min() >= 1.0 - 1e-10);
    }

    #[test]
    fn size_guard() {
        let g = generate::path(2001, 1.0).unwrap();
        assert!(matches!(
            dense_generalized_eigs(&g, &g),
            Err(Error::SizeGuard { n: 2001, .. })
        ));
    }

    #[test]
    fn dense_solver_inverts() {
        let g = generate::random_connected(25, 4.0, 8).unwrap();
        let solver = DenseSolver::new(&g).unwrap();
        let mut y: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        project_out_ones(&mut y);
        let x = solver.solve(&g.laplacian_apply(&y).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_eigs_of_path() {
        // path on 4 vertices: eigenvalues 2 - 2cos(k pi / 4)
        let (vals, _) = dense_laplacian_eigs(&generate::path(4, 1.0).unwrap()).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let expect = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos();
            assert!((v - expect).abs() < 1e-12);
        }
    }
}
