//! Tree-plus-recovered-edges sparsifiers, their factorization and the
//! round-by-round densification loop.

mod densify;
mod factor;
mod rank_one;

pub use densify::{
    deduplicate_similar, densify, filter_edges, DensifyConfig, RoundRecord, StopReason,
    DENSIFY_LAMBDA_MAX_ITERS, DENSIFY_LAMBDA_MAX_TOL, ESTIMATE_SLACK,
};
pub use factor::{Preconditioner, SparseCholesky, WoodburySolver, WOODBURY_MAX_EDGES};
pub use rank_one::{predicted_eigenvalue_after_add, rank_one_gamma, weight_for_target};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{mtx, Edge, VertexVector, WeightedGraph};
use crate::solver::LaplacianSolver;
use crate::tree::SpanningTree;

/// An off-tree edge recovered into the sparsifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveredEdge {
    /// Index in the original graph.
    pub edge: usize,
    pub p: usize,
    pub q: usize,
    pub w: f64,
    pub round: usize,
}

/// A spanning tree plus recovered off-tree edges of an original graph,
/// together with a direct solver for its Laplacian `L_P`.
#[derive(Debug, Clone)]
pub struct Sparsifier {
    tree: SpanningTree,
    offtree: Vec<RecoveredEdge>,
    member: Vec<bool>,
    graph: WeightedGraph,
    precond: Preconditioner,
    history: Vec<RoundRecord>,
    stop: Option<StopReason>,
}

impl Sparsifier {
    /// The bare tree as a sparsifier of `g`.
    pub fn from_tree(g: &WeightedGraph, tree: SpanningTree) -> Result<Self> {
        if tree.n() != g.n() {
            return Err(Error::LengthMismatch {
                expected: g.n(),
                got: tree.n(),
            });
        }
        let ids = tree.edge_ids();
        let mut member = vec![false; g.m()];
        for &e in &ids {
            if e >= g.m() {
                return Err(Error::NotSpanning(format!("tree edge {e} not in graph")));
            }
            member[e] = true;
        }
        let graph = g.edge_subgraph(&ids)?;
        let precond = Preconditioner::Tree(tree.clone());
        Ok(Sparsifier {
            tree,
            offtree: Vec::new(),
            member,
            graph,
            precond,
            history: Vec::new(),
            stop: None,
        })
    }

    /// Tree plus the given off-tree edges, all attributed to round 0.
    pub fn with_edges(g: &WeightedGraph, tree: SpanningTree, edges: &[usize]) -> Result<Self> {
        let mut sp = Sparsifier::from_tree(g, tree)?;
        sp.add_edges(g, edges, 0)?;
        Ok(sp)
    }

    /// Recovers off-tree edges of `g` with their original weights and
    /// refactors `L_P`.
    pub fn add_edges(&mut self, g: &WeightedGraph, edges: &[usize], round: usize) -> Result<()> {
        if edges.is_empty() {
            return Ok(());
        }
        for &e in edges {
            if e >= g.m() {
                return Err(Error::InvalidArgument(format!("edge {e} out of range")));
            }
            if self.member[e] {
                return Err(Error::InvalidArgument(format!(
                    "edge {e} already in sparsifier"
                )));
            }
            self.member[e] = true;
            let Edge { p, q, w } = g.edge(e);
            self.offtree.push(RecoveredEdge {
                edge: e,
                p,
                q,
                w,
                round,
            });
        }
        self.refactor(g)
    }

    fn refactor(&mut self, g: &WeightedGraph) -> Result<()> {
        let mut ids = self.tree.edge_ids();
        ids.extend(self.offtree.iter().map(|r| r.edge));
        self.graph = g.edge_subgraph(&ids)?;
        let extra: Vec<Edge> = self
            .offtree
            .iter()
            .map(|r| Edge {
                p: r.p,
                q: r.q,
                w: r.w,
            })
            .collect();
        let graph = &self.graph;
        self.precond = Preconditioner::build(&self.tree, &extra, || Ok(graph.clone()))?;
        Ok(())
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn offtree_edges(&self) -> &[RecoveredEdge] {
        &self.offtree
    }

    /// Whether original edge `e` is part of the sparsifier.
    pub fn contains(&self, e: usize) -> bool {
        self.member.get(e).copied().unwrap_or(false)
    }

    /// The sparsifier as a graph on the same vertex set.
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        &self.precond
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    /// `(n - 1) + |recovered edges|`.
    pub fn edge_count(&self) -> usize {
        self.n() - 1 + self.offtree.len()
    }

    /// `|E_s| / |V|`.
    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / self.n() as f64
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    /// False when densification stopped above its target (or never ran).
    pub fn converged(&self) -> bool {
        self.stop == Some(StopReason::Converged)
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub(crate) fn finish(&mut self, history: Vec<RoundRecord>, stop: StopReason) {
        self.history = history;
        self.stop = Some(stop);
    }

    /// Writes `L_P` in Matrix Market format.
    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        mtx::write_matrix_market(&self.graph, path)
    }

    /// Writes the tree and recovered edges, one per line, as
    /// `kind p q w round` with 0-based vertices.
    pub fn write_sidecar(&self, g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_edge_list(g, &mut out)
            .map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_edge_list<W: Write>(&self, g: &WeightedGraph, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# kind\tp\tq\tw\tround")?;
        for e in self.tree.edge_ids() {
            let Edge { p, q, w } = g.edge(e);
            writeln!(out, "tree\t{p}\t{q}\t{w}\t-")?;
        }
        for r in &self.offtree {
            writeln!(out, "offtree\t{}\t{}\t{}\t{}", r.p, r.q, r.w, r.round)?;
        }
        Ok(())
    }
}

impl LaplacianSolver for Sparsifier {
    fn dim(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[f64]) -> Result<VertexVector> {
        self.precond.solve(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{self, Weighting};
    use crate::numeric::norm;
    use crate::tree::{low_stretch, max_weight};

    #[test]
    fn edge_count_and_membership() {
        let g = generate::grid(10, 10, Weighting::Unit).unwrap();
        let t = max_weight(&g).unwrap();
        let off: Vec<usize> = (0..g.m()).filter(|&e| !t.is_tree_edge(e)).take(5).collect();
        let sp = Sparsifier::with_edges(&g, t, &off).unwrap();
        assert_eq!(sp.edge_count(), 99 + 5);
        assert_eq!(sp.graph().m(), 104);
        assert!(off.iter().all(|&e| sp.contains(e)));
        assert_eq!(sp.preconditioner().kind(), "woodbury");
    }

    #[test]
    fn duplicate_edges_rejected() {
        let g = generate::grid(4, 4, Weighting::Unit).unwrap();
        let t = max_weight(&g).unwrap();
        let tree_edge = t.edge_ids()[0];
        let mut sp = Sparsifier::from_tree(&g, t.clone()).unwrap();
        assert!(sp.add_edges(&g, &[tree_edge], 1).is_err());
        let off = (0..g.m()).find(|&e| !t.is_tree_edge(e)).unwrap();
        let mut sp = Sparsifier::from_tree(&g, t).unwrap();
        sp.add_edges(&g, &[off], 1).unwrap();
        assert!(sp.add_edges(&g, &[off], 2).is_err());
    }

    #[test]
    fn solver_residual_across_factorizations() {
        let g = generate::grid(30, 30, Weighting::UniformRandom(5)).unwrap();
        let t = low_stretch(&g, 1).unwrap();
        let off: Vec<usize> = (0..g.m()).filter(|&e| !t.is_tree_edge(e)).collect();
        let b: Vec<f64> = (0..g.n()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        for count in [0, 30, 200] {
            let sp = Sparsifier::with_edges(&g, t.clone(), &off[..count]).unwrap();
            let x = sp.solve(&b).unwrap();
            let mut bp = b.clone();
            crate::numeric::project_out_ones(&mut bp);
            let lx = sp.graph().laplacian_apply(&x).unwrap();
            let r: Vec<f64> = lx.iter().zip(&bp).map(|(a, c)| a - c).collect();
            assert!(
                norm(&r) <= 1e-12 * norm(&bp),
                "{count} edges via {}",
                sp.preconditioner().kind()
            );
        }
    }

    #[test]
    fn sidecar_lists_all_edges() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let t = max_weight(&g).unwrap();
        let sp = Sparsifier::with_edges(&g, t, &[2]).unwrap();
        let mut buf = Vec::new();
        sp.write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.ends_with("offtree\t0\t2\t1\t0\n"));
    }
}
