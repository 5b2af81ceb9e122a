//! Spanning-tree backbones: stretch queries, tree paths and linear-time
//! solves with the tree Laplacian.

mod build;

pub use build::{hair_comb, low_stretch, max_weight, TreeStrategy};

use crate::error::{Error, Result};
use crate::graph::{VertexVector, WeightedGraph};
use crate::numeric::{project_out_ones, CompensatedSum};

const NO_EDGE: usize = usize::MAX;

/// A rooted spanning tree of a [`WeightedGraph`].
///
/// Tree edges are identified by their index in the source graph. Each
/// non-root vertex owns the edge to its parent.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<usize>,
    parent_weight: Vec<f64>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    path_resistance: Vec<f64>,
    // root first, every vertex after its parent
    order: Vec<usize>,
    // ancestors[k][v] is the 2^k-th ancestor of v (root maps to itself)
    ancestors: Vec<Vec<usize>>,
    // child vertex owning the most resistive edge on the 2^k jump from v,
    // and whether that resistance occurs more than once on the jump
    bottlenecks: Vec<Vec<usize>>,
    tied: Vec<Vec<bool>>,
    in_tree: Vec<bool>,
    self_weights: Vec<f64>,
    grounding: f64,
    pivots: Vec<f64>,
}

/// The unique tree path between two vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePath {
    /// Graph edge indices in order from `p` to `q`.
    pub edges: Vec<usize>,
    /// Most resistive edge on the path; see [`SpanningTree::bottleneck`].
    pub bottleneck: usize,
}

impl SpanningTree {
    /// Builds a tree rooted at vertex 0 from `n - 1` edges of `graph`.
    pub fn from_edges(graph: &WeightedGraph, edge_ids: &[usize]) -> Result<Self> {
        let n = graph.n();
        if edge_ids.len() != n - 1 {
            return Err(Error::NotSpanning(format!(
                "expected {} edges, got {}",
                n - 1,
                edge_ids.len()
            )));
        }
        let mut in_tree = vec![false; graph.m()];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &e in edge_ids {
            if e >= graph.m() {
                return Err(Error::NotSpanning(format!("edge index {e} out of range")));
            }
            if in_tree[e] {
                return Err(Error::NotSpanning(format!("edge {e} listed twice")));
            }
            in_tree[e] = true;
            let edge = graph.edge(e);
            adj[edge.p].push(e);
            adj[edge.q].push(e);
        }

        let root = 0;
        let mut parent = vec![NO_EDGE; n];
        let mut parent_weight = vec![0.0; n];
        let mut parent_edge = vec![NO_EDGE; n];
        let mut depth = vec![0usize; n];
        let mut path_resistance = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        parent[root] = root;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &e in &adj[v] {
                let edge = graph.edge(e);
                let u = edge.other(v);
                if parent[u] != NO_EDGE {
                    continue;
                }
                parent[u] = v;
                parent_weight[u] = edge.w;
                parent_edge[u] = e;
                depth[u] = depth[v] + 1;
                path_resistance[u] = path_resistance[v] + 1.0 / edge.w;
                order.push(u);
            }
        }
        if order.len() != n {
            return Err(Error::NotSpanning(format!(
                "tree reaches {} of {} vertices",
                order.len(),
                n
            )));
        }

        let mut tree = SpanningTree {
            root,
            parent,
            parent_weight,
            parent_edge,
            depth,
            path_resistance,
            order,
            ancestors: Vec::new(),
            bottlenecks: Vec::new(),
            tied: Vec::new(),
            in_tree,
            self_weights: graph.self_weights().to_vec(),
            grounding: if graph.has_self_weights() {
                0.0
            } else {
                graph.grounding_epsilon()
            },
            pivots: Vec::new(),
        };
        tree.build_lifting();
        tree.factor()?;
        Ok(tree)
    }

    fn build_lifting(&mut self) {
        let n = self.n();
        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut ancestors = vec![self.parent.clone()];
        let mut bottlenecks = vec![(0..n).collect::<Vec<_>>()];
        let mut tied = vec![vec![false; n]];
        for k in 1..levels {
            let (prev_a, prev_b, prev_t) = (&ancestors[k - 1], &bottlenecks[k - 1], &tied[k - 1]);
            let mut a = vec![0; n];
            let mut b = vec![0; n];
            let mut t = vec![false; n];
            for v in 0..n {
                let mid = prev_a[v];
                a[v] = prev_a[mid];
                (b[v], t[v]) = self.merge((prev_b[v], prev_t[v]), (prev_b[mid], prev_t[mid]));
            }
            ancestors.push(a);
            bottlenecks.push(b);
            tied.push(t);
        }
        self.ancestors = ancestors;
        self.bottlenecks = bottlenecks;
        self.tied = tied;
    }

    // Combines two path segments, each summarized by the child vertex of its
    // most resistive edge and a tie flag. The root stands for "no edge".
    fn merge(&self, a: (usize, bool), b: (usize, bool)) -> (usize, bool) {
        if a.0 == self.root {
            return b;
        }
        if b.0 == self.root {
            return a;
        }
        let (wa, wb) = (self.parent_weight[a.0], self.parent_weight[b.0]);
        if wa == wb {
            let v = if self.parent_edge[a.0] < self.parent_edge[b.0] {
                a.0
            } else {
                b.0
            };
            (v, true)
        } else if wa < wb {
            a
        } else {
            b
        }
    }

    // Among the most resistive edges of an explicit path (child vertices in
    // order), picks the one whose midpoint is nearest the middle of the path
    // in resistance, then the lowest edge index.
    fn pick_bottleneck(&self, path: &[usize]) -> usize {
        let wmin = path
            .iter()
            .map(|&v| self.parent_weight[v])
            .fold(f64::INFINITY, f64::min);
        let total: f64 = path.iter().map(|&v| 1.0 / self.parent_weight[v]).sum();
        let mut before = 0.0;
        let mut best: Option<(f64, usize)> = None;
        for &v in path {
            let r = 1.0 / self.parent_weight[v];
            if self.parent_weight[v] == wmin {
                let offset = (2.0 * before + r - total).abs();
                let e = self.parent_edge[v];
                let better = match best {
                    None => true,
                    Some((o, b)) => offset < o || (offset == o && e < self.parent_edge[b]),
                };
                if better {
                    best = Some((offset, v));
                }
            }
            before += r;
        }
        best.expect("non-empty path").1
    }

    // Child vertices of the tree path from p to q, in order.
    fn path_children(&self, p: usize, q: usize) -> Vec<usize> {
        let a = self.lca(p, q);
        let mut up = Vec::new();
        let mut v = p;
        while v != a {
            up.push(v);
            v = self.parent[v];
        }
        let mut down = Vec::new();
        let mut v = q;
        while v != a {
            down.push(v);
            v = self.parent[v];
        }
        up.extend(down.into_iter().rev());
        up
    }

    // Leaf-first elimination of (L_T + D_self + eps e_root e_root^T).
    fn factor(&mut self) -> Result<()> {
        let n = self.n();
        let mut d: Vec<f64> = self.self_weights.clone();
        for v in 0..n {
            if v != self.root {
                d[v] += self.parent_weight[v];
                d[self.parent[v]] += self.parent_weight[v];
            }
        }
        d[self.root] += self.grounding;
        for &v in self.order.iter().rev() {
            if v == self.root {
                continue;
            }
            let piv = d[v];
            if !(piv > 0.0) {
                return Err(Error::NonPositivePivot {
                    vertex: v,
                    pivot: piv,
                });
            }
            let w = self.parent_weight[v];
            d[self.parent[v]] -= w * w / piv;
        }
        if !(d[self.root] > 0.0) {
            return Err(Error::NonPositivePivot {
                vertex: self.root,
                pivot: d[self.root],
            });
        }
        self.pivots = d;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parent_weight(&self, v: usize) -> f64 {
        self.parent_weight[v]
    }

    /// Graph edge index of `v`'s parent edge, `None` at the root.
    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        (v != self.root).then(|| self.parent_edge[v])
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn path_resistance(&self, v: usize) -> f64 {
        self.path_resistance[v]
    }

    /// Vertices with every child before its parent.
    pub fn elimination_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().rev().copied()
    }

    pub fn is_tree_edge(&self, edge: usize) -> bool {
        self.in_tree.get(edge).copied().unwrap_or(false)
    }

    /// Graph edge indices of the tree, ordered by child vertex.
    pub fn edge_ids(&self) -> Vec<usize> {
        (0..self.n()).filter_map(|v| self.parent_edge(v)).collect()
    }

    /// `true` when the tree Laplacian is singular (no self weights) and
    /// solves are grounded at the root.
    pub fn is_singular(&self) -> bool {
        self.grounding > 0.0
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            });
        }
        Ok(())
    }

    pub fn lca(&self, mut p: usize, mut q: usize) -> usize {
        if self.depth[p] < self.depth[q] {
            std::mem::swap(&mut p, &mut q);
        }
        let mut diff = self.depth[p] - self.depth[q];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                p = self.ancestors[k][p];
            }
            diff >>= 1;
            k += 1;
        }
        if p == q {
            return p;
        }
        for k in (0..self.ancestors.len()).rev() {
            if self.ancestors[k][p] != self.ancestors[k][q] {
                p = self.ancestors[k][p];
                q = self.ancestors[k][q];
            }
        }
        self.parent[p]
    }

    /// Sum of edge resistances along the tree path.
    pub fn path_resistance_between(&self, p: usize, q: usize) -> Result<f64> {
        self.check_vertex(p)?;
        self.check_vertex(q)?;
        let a = self.lca(p, q);
        Ok(self.path_resistance[p] + self.path_resistance[q] - 2.0 * self.path_resistance[a])
    }

    /// Stretch of an edge `(p, q)` of weight `w`: `w` times the tree-path
    /// resistance between its endpoints.
    pub fn edge_stretch(&self, p: usize, q: usize, w: f64) -> Result<f64> {
        if p == q {
            return Err(Error::SelfLoop(p));
        }
        Ok(w * self.path_resistance_between(p, q)?)
    }

    /// Sum of stretches over every graph edge.
    pub fn total_stretch(&self, graph: &WeightedGraph) -> Result<f64> {
        if graph.n() != self.n() {
            return Err(Error::NotSpanning(format!(
                "tree has {} vertices, graph {}",
                self.n(),
                graph.n()
            )));
        }
        let mut acc = CompensatedSum::new();
        for (i, e) in graph.edges().iter().enumerate() {
            if self.is_tree_edge(i) {
                acc.add(1.0);
            } else {
                acc.add(self.edge_stretch(e.p, e.q, e.w)?);
            }
        }
        Ok(acc.value())
    }

    /// Most resistive tree edge between `p` and `q`. Among equally resistive
    /// edges the one nearest the middle of the path (in resistance) wins,
    /// then the lowest edge index, so the choice does not depend on the root.
    ///
    /// O(log n) unless the path has ties, which need a walk along the path.
    pub fn bottleneck(&self, p: usize, q: usize) -> Result<usize> {
        self.check_vertex(p)?;
        self.check_vertex(q)?;
        if p == q {
            return Err(Error::SelfLoop(p));
        }
        let a = self.lca(p, q);
        let mut best = (self.root, false);
        for mut v in [p, q] {
            let mut diff = self.depth[v] - self.depth[a];
            let mut k = 0;
            while diff > 0 {
                if diff & 1 == 1 {
                    best = self.merge(best, (self.bottlenecks[k][v], self.tied[k][v]));
                    v = self.ancestors[k][v];
                }
                diff >>= 1;
                k += 1;
            }
        }
        if best.1 {
            best.0 = self.pick_bottleneck(&self.path_children(p, q));
        }
        Ok(self.parent_edge[best.0])
    }

    /// Explicit tree path from `p` to `q` with its bottleneck edge.
    pub fn path_edges(&self, p: usize, q: usize) -> Result<TreePath> {
        self.check_vertex(p)?;
        self.check_vertex(q)?;
        if p == q {
            return Err(Error::SelfLoop(p));
        }
        let children = self.path_children(p, q);
        Ok(TreePath {
            edges: children.iter().map(|&v| self.parent_edge[v]).collect(),
            bottleneck: self.parent_edge[self.pick_bottleneck(&children)],
        })
    }

    /// Solves `(L_T + D_self) x = b` in O(n).
    ///
    /// For a pure tree Laplacian `b` is projected orthogonal to the all-ones
    /// vector, the system is grounded at the root, and the solution is
    /// returned with zero mean.
    pub fn tree_solve(&self, b: &[f64]) -> Result<VertexVector> {
        let mut x = b.to_vec();
        self.tree_solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn tree_solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        if self.is_singular() {
            project_out_ones(x);
        }
        for &v in self.order.iter().rev() {
            if v == self.root {
                continue;
            }
            let p = self.parent[v];
            x[p] += self.parent_weight[v] * x[v] / self.pivots[v];
        }
        x[self.root] /= self.pivots[self.root];
        for &v in self.order.iter() {
            if v == self.root {
                continue;
            }
            x[v] = (x[v] + self.parent_weight[v] * x[self.parent[v]]) / self.pivots[v];
        }
        if self.is_singular() {
            project_out_ones(x);
        }
        Ok(())
    }

    /// The tree as a standalone graph (keeps the self weights).
    pub fn to_graph(&self, graph: &WeightedGraph) -> Result<WeightedGraph> {
        graph.edge_subgraph(&self.edge_ids())
    }
}
