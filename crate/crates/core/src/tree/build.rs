use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use super::SpanningTree;
use crate::error::{Error, Result};
use crate::graph::generate::grid_vertex;
use crate::graph::WeightedGraph;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeStrategy {
    MaxWeight,
    LowStretch { seed: u64 },
}

impl TreeStrategy {
    pub fn extract(self, graph: &WeightedGraph) -> Result<SpanningTree> {
        match self {
            TreeStrategy::MaxWeight => max_weight(graph),
            TreeStrategy::LowStretch { seed } => low_stretch(graph, seed),
        }
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Maximum-weight spanning tree (Kruskal); equal weights keep the lower
/// edge index first.
pub fn max_weight(graph: &WeightedGraph) -> Result<SpanningTree> {
    let mut order: Vec<usize> = (0..graph.m()).collect();
    order.sort_by(|&a, &b| graph.edge(b).w.total_cmp(&graph.edge(a).w).then(a.cmp(&b)));
    let mut sets = DisjointSets::new(graph.n());
    let mut chosen = Vec::with_capacity(graph.n() - 1);
    for e in order {
        let edge = graph.edge(e);
        if sets.union(edge.p, edge.q) {
            chosen.push(e);
            if chosen.len() == graph.n() - 1 {
                break;
            }
        }
    }
    SpanningTree::from_edges(graph, &chosen)
}

/// Radii tried by the ball-growing heuristic, in units of the shortest edge
/// length at each contraction level.
const RADIUS_SCHEDULE: [f64; 3] = [2.0, 4.0, 8.0];

/// Low-stretch heuristic: repeated ball-growing decompositions with
/// contraction, one per radius in a geometric schedule. The candidate with
/// the lowest total stretch wins, and the maximum-weight tree is kept if no
/// candidate beats it.
pub fn low_stretch(graph: &WeightedGraph, seed: u64) -> Result<SpanningTree> {
    let mut best = max_weight(graph)?;
    let mut best_stretch = best.total_stretch(graph)?;
    for (trial, &radius) in RADIUS_SCHEDULE.iter().enumerate() {
        let mut rng = rng::stream(seed, Purpose::TreeHeuristic, 0, trial as u64);
        let edges = ball_growing_tree(graph, radius, &mut rng);
        let tree = SpanningTree::from_edges(graph, &edges)?;
        let stretch = tree.total_stretch(graph)?;
        if stretch < best_stretch {
            best = tree;
            best_stretch = stretch;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, PartialEq)]
struct Visit {
    dist: f64,
    vertex: usize,
}

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// One level of the contracted graph: cluster ids plus representative
// original edges between clusters.
struct Level {
    offsets: Vec<usize>,
    // (neighbor, weight, original edge)
    adj: Vec<(usize, f64, usize)>,
}

impl Level {
    fn build(n: usize, edges: &HashMap<(usize, usize), (f64, usize)>) -> Level {
        let mut list: Vec<(usize, usize, f64, usize)> = edges
            .iter()
            .map(|(&(a, b), &(w, e))| (a, b, w, e))
            .collect();
        list.sort_by_key(|&(_, _, _, e)| e);
        let mut offsets = vec![0usize; n + 1];
        for &(a, b, _, _) in &list {
            offsets[a + 1] += 1;
            offsets[b + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut adj = vec![(0, 0.0, 0); 2 * list.len()];
        for &(a, b, w, e) in &list {
            adj[cursor[a]] = (b, w, e);
            cursor[a] += 1;
            adj[cursor[b]] = (a, w, e);
            cursor[b] += 1;
        }
        Level { offsets, adj }
    }

    fn neighbors(&self, v: usize) -> &[(usize, f64, usize)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }
}

fn ball_growing_tree<R: Rng>(graph: &WeightedGraph, radius: f64, rng: &mut R) -> Vec<usize> {
    let mut tree_edges = Vec::with_capacity(graph.n() - 1);
    let mut level_edges: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    for (i, e) in graph.edges().iter().enumerate() {
        level_edges.insert((e.p, e.q), (e.w, i));
    }
    let mut level_n = graph.n();
    let mut scale = 1.0;
    while level_n > 1 {
        let level = Level::build(level_n, &level_edges);
        let w_max = level_edges.values().map(|&(w, _)| w).fold(0.0, f64::max);
        let length = |w: f64| w_max / w;

        let mut centers: Vec<usize> = (0..level_n).collect();
        centers.shuffle(rng);
        let mut cluster = vec![usize::MAX; level_n];
        let mut dist = vec![f64::INFINITY; level_n];
        let mut clusters = 0;
        let mut new_edges = Vec::new();
        for &s in &centers {
            if cluster[s] != usize::MAX {
                continue;
            }
            let r = scale * radius * rng.gen_range(0.5..1.5);
            let id = clusters;
            clusters += 1;
            dist[s] = 0.0;
            let mut touched = vec![s];
            let mut heap = BinaryHeap::from([Visit {
                dist: 0.0,
                vertex: s,
            }]);
            let mut via: HashMap<usize, usize> = HashMap::new();
            while let Some(Visit { dist: d, vertex: v }) = heap.pop() {
                if cluster[v] != usize::MAX || d > dist[v] {
                    continue;
                }
                cluster[v] = id;
                if let Some(&e) = via.get(&v) {
                    new_edges.push(e);
                }
                for &(u, w, e) in level.neighbors(v) {
                    if cluster[u] != usize::MAX {
                        continue;
                    }
                    let nd = d + length(w);
                    if nd <= r && nd < dist[u] {
                        if dist[u].is_infinite() {
                            touched.push(u);
                        }
                        dist[u] = nd;
                        via.insert(u, e);
                        heap.push(Visit {
                            dist: nd,
                            vertex: u,
                        });
                    }
                }
            }
            for v in touched {
                dist[v] = f64::INFINITY;
            }
        }
        if clusters == level_n {
            // every ball was a singleton; widen and retry this level
            scale *= 2.0;
            continue;
        }
        tree_edges.extend(new_edges);

        let mut next: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
        for (&(a, b), &(w, e)) in &level_edges {
            let (ca, cb) = (cluster[a], cluster[b]);
            if ca == cb {
                continue;
            }
            let key = (ca.min(cb), ca.max(cb));
            next.entry(key)
                .and_modify(|cur| {
                    if w > cur.0 || (w == cur.0 && e < cur.1) {
                        *cur = (w, e);
                    }
                })
                .or_insert((w, e));
        }
        level_edges = next;
        level_n = clusters;
        scale = 1.0;
    }
    tree_edges
}

/// Hair-comb tree of a `rows x cols` grid from
/// [`generate::grid`](crate::graph::generate::grid): every vertical edge
/// (the teeth) plus the horizontal edges of the bottom row (the spine).
pub fn hair_comb(graph: &WeightedGraph, rows: usize, cols: usize) -> Result<SpanningTree> {
    if rows < 2 || cols < 2 {
        return Err(Error::GridTooSmall { rows, cols });
    }
    if graph.n() != rows * cols {
        return Err(Error::InvalidArgument(format!(
            "graph has {} vertices, grid {}x{} needs {}",
            graph.n(),
            rows,
            cols,
            rows * cols
        )));
    }
    let mut edges = Vec::with_capacity(graph.n() - 1);
    let mut push = |p: usize, q: usize| -> Result<()> {
        edges.push(graph.find_edge(p, q).ok_or(Error::MissingEdge { p, q })?);
        Ok(())
    };
    for c in 0..cols {
        for r in 0..rows - 1 {
            push(grid_vertex(cols, r, c), grid_vertex(cols, r + 1, c))?;
        }
    }
    for c in 0..cols - 1 {
        push(
            grid_vertex(cols, rows - 1, c),
            grid_vertex(cols, rows - 1, c + 1),
        )?;
    }
    SpanningTree::from_edges(graph, &edges)
}
