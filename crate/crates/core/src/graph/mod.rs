//! Weighted undirected graphs and their implicit Laplacians.
//!
//! A [`WeightedGraph`] never materializes its Laplacian. `L_G x` and
//! `x^T L_G x` are evaluated edge by edge, with the per-vertex
//! `self_weights` (diagonal surplus of an SDD input) added on the diagonal.

pub mod generate;
pub mod mtx;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Real value per vertex.
pub type VertexVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.p {
            self.q
        } else {
            self.p
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    // (neighbor, edge index), grouped per vertex by `offsets`
    adjacency: Vec<(usize, usize)>,
    self_weights: Vec<f64>,
    degrees: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a pure Laplacian graph (zero self weights).
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::with_self_weights(n, edges, vec![0.0; n])
    }

    /// Builds a graph from an edge list plus a diagonal surplus per vertex.
    ///
    /// Parallel edges are merged by summing their weights; the merged edge
    /// keeps the position of the first occurrence.
    pub fn with_self_weights<I>(n: usize, edges: I, self_weights: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n < 2 {
            return Err(Error::TooSmall(n));
        }
        if self_weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self_weights.len(),
            });
        }
        for (vertex, &w) in self_weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::BadSelfWeight { vertex, w });
            }
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged: Vec<Edge> = Vec::new();
        for (p, q, w) in edges {
            for v in [p, q] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if p == q {
                return Err(Error::SelfLoop(p));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::BadWeight { p, q, w });
            }
            let (a, b) = if p < q { (p, q) } else { (q, p) };
            match index.get(&(a, b)) {
                Some(&i) => merged[i].w += w,
                None => {
                    index.insert((a, b), merged.len());
                    merged.push(Edge { p: a, q: b, w });
                }
            }
        }
        let graph = Self::assemble(n, merged, self_weights);
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    fn assemble(n: usize, edges: Vec<Edge>, self_weights: Vec<f64>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            counts[e.p + 1] += 1;
            counts[e.q + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut adjacency = vec![(0usize, 0usize); 2 * edges.len()];
        let mut degrees = vec![0.0; n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[cursor[e.p]] = (e.q, i);
            cursor[e.p] += 1;
            adjacency[cursor[e.q]] = (e.p, i);
            cursor[e.q] += 1;
            degrees[e.p] += e.w;
            degrees[e.q] += e.w;
        }
        WeightedGraph {
            n,
            edges,
            offsets,
            adjacency,
            self_weights,
            degrees,
        }
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut components = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(u, _) in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        components
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> Edge {
        self.edges[i]
    }

    /// `(neighbor, edge index)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn self_weights(&self) -> &[f64] {
        &self.self_weights
    }

    pub fn has_self_weights(&self) -> bool {
        self.self_weights.iter().any(|&w| w > 0.0)
    }

    /// Sum of incident edge weights (excludes the self weight).
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    /// Laplacian diagonal entry `L(v, v)`.
    pub fn diagonal(&self, v: usize) -> f64 {
        self.degrees[v] + self.self_weights[v]
    }

    pub fn mean_weighted_degree(&self) -> f64 {
        self.degrees.iter().sum::<f64>() / self.n as f64
    }

    /// Regularization added at the grounding vertex when factoring a
    /// singular Laplacian.
    pub fn grounding_epsilon(&self) -> f64 {
        1e-6 * self.mean_weighted_degree()
    }

    pub fn find_edge(&self, p: usize, q: usize) -> Option<usize> {
        if p >= self.n || q >= self.n {
            return None;
        }
        let (a, b) = if self.neighbors(p).len() <= self.neighbors(q).len() {
            (p, q)
        } else {
            (q, p)
        };
        self.neighbors(a)
            .iter()
            .find(|&&(u, _)| u == b)
            .map(|&(_, e)| e)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `L_G x`.
    pub fn laplacian_apply(&self, x: &[f64]) -> Result<VertexVector> {
        let mut y = vec![0.0; self.n];
        self.laplacian_apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn laplacian_apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_len(x)?;
        self.check_len(y)?;
        for v in 0..self.n {
            let mut acc = self.diagonal(v) * x[v];
            for &(u, e) in self.neighbors(v) {
                acc -= self.edges[e].w * x[u];
            }
            y[v] = acc;
        }
        Ok(())
    }

    /// `x^T L_G x` as a sum of per-edge Joule heats plus the self-weight terms.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let mut acc = CompensatedSum::new();
        for e in &self.edges {
            let d = x[e.p] - x[e.q];
            acc.add(e.w * d * d);
        }
        for (v, &s) in self.self_weights.iter().enumerate() {
            if s > 0.0 {
                acc.add(s * x[v] * x[v]);
            }
        }
        Ok(acc.value())
    }

    /// Subgraph on the same vertex set keeping the given edges and all self
    /// weights. Fails if the selection does not connect the graph.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> Result<WeightedGraph> {
        let edges = edge_ids.iter().map(|&i| {
            let e = self.edges[i];
            (e.p, e.q, e.w)
        });
        WeightedGraph::with_self_weights(self.n, edges, self.self_weights.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn triangle_laplacian_apply() {
        let y = triangle().laplacian_apply(&[1.0, 0.0, -1.0]).unwrap();
        assert_eq!(y, vec![3.0, 0.0, -3.0]);
    }

    #[test]
    fn triangle_quadratic_form() {
        assert_eq!(triangle().quadratic_form(&[1.0, 0.0, -1.0]).unwrap(), 6.0);
        assert_eq!(triangle().quadratic_form(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn ones_in_nullspace() {
        let g = generate::grid(4, 5, generate::Weighting::UniformRandom(3)).unwrap();
        let y = g.laplacian_apply(&vec![1.0; g.n()]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn resistor_network_columns() {
        // Four-node resistor network with conductances on each element.
        let g = WeightedGraph::new(
            4,
            [
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 0.5),
                (0, 3, 3.0),
                (1, 3, 1.5),
            ],
        )
        .unwrap();
        let dense = [
            [4.0, -1.0, 0.0, -3.0],
            [-1.0, 4.5, -2.0, -1.5],
            [0.0, -2.0, 2.5, -0.5],
            [-3.0, -1.5, -0.5, 5.0],
        ];
        for (j, col) in (0..4).map(|j| (j, dense.map(|row| row[j]))) {
            let mut e = vec![0.0; 4];
            e[j] = 1.0;
            assert_eq!(g.laplacian_apply(&e).unwrap(), col.to_vec());
        }
    }

    #[test]
    fn parallel_edges_merge() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.5)]).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.edge(0).w, 3.5);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            WeightedGraph::new(3, [(0, 0, 1.0), (1, 2, 1.0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            WeightedGraph::new(3, [(0, 1, -1.0), (1, 2, 1.0)]),
            Err(Error::BadWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(
            WeightedGraph::new(3, [(0, 5, 1.0)]),
            Err(Error::VertexOutOfRange { vertex: 5, .. })
        ));
        assert!(matches!(
            triangle().laplacian_apply(&[1.0]),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn degree_matches_diagonal() {
        let g =
            WeightedGraph::with_self_weights(3, [(0, 1, 2.0), (1, 2, 3.0)], vec![0.5, 0.0, 1.0])
                .unwrap();
        for v in 0..3 {
            let mut e = vec![0.0; 3];
            e[v] = 1.0;
            let col = g.laplacian_apply(&e).unwrap();
            assert_eq!(col[v] - g.self_weights()[v], g.weighted_degree(v));
        }
    }

    #[test]
    fn indicator_quadratic_form_counts_cut() {
        let g = generate::grid(5, 6, generate::Weighting::Unit).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0..2) as f64).collect();
            let brute = g.edges().iter().filter(|e| x[e.p] != x[e.q]).count() as f64;
            assert_eq!(g.quadratic_form(&x).unwrap(), brute);
        }
    }

    proptest! {
        #[test]
        fn quadratic_form_matches_apply(seed in 0u64..1000, n in 2usize..200) {
            let g = generate::random_connected(n, 3.0, seed).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = g.quadratic_form(&x).unwrap();
            let lx = g.laplacian_apply(&x).unwrap();
            let d = crate::numeric::dot(&x, &lx);
            prop_assert!(q >= 0.0);
            prop_assert!((q - d).abs() <= 1e-12 * q.abs().max(1e-300) + 1e-14);
        }
    }
}
