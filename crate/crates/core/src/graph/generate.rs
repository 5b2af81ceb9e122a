//! Synthetic graph families used by the CLI, tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Unit,
    /// Weights drawn uniformly from `[0.5, 1.5)`.
    UniformRandom(u64),
}

/// Vertex index of grid cell `(row, col)`.
pub fn grid_vertex(cols: usize, row: usize, col: usize) -> usize {
    row * cols + col
}

/// 4-connected `rows x cols` mesh. Edges are listed row-major, the right
/// neighbor before the lower one.
pub fn grid(rows: usize, cols: usize, weighting: Weighting) -> Result<WeightedGraph> {
    if rows < 2 || cols < 2 {
        return Err(Error::GridTooSmall { rows, cols });
    }
    let mut rng = match weighting {
        Weighting::Unit => None,
        Weighting::UniformRandom(seed) => Some(rng::stream(seed, Purpose::GridWeights, 0, 0)),
    };
    let mut weight = || match rng.as_mut() {
        Some(r) => r.gen_range(0.5..1.5),
        None => 1.0,
    };
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = grid_vertex(cols, r, c);
            if c + 1 < cols {
                edges.push((v, v + 1, weight()));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, weight()));
            }
        }
    }
    WeightedGraph::new(rows * cols, edges)
}

/// Random connected graph: a random recursive tree plus extra random edges so
/// the average degree is about `avg_degree`. Weights are uniform in
/// `[0.1, 10)`.
pub fn random_connected(n: usize, avg_degree: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.1..10.0)));
    }
    let target = ((avg_degree * n as f64) / 2.0).round() as usize;
    let max_edges = n * (n - 1) / 2;
    let extra = target.saturating_sub(n - 1).min(max_edges - (n - 1));
    let mut present: std::collections::HashSet<(usize, usize)> = edges
        .iter()
        .map(|&(u, v, _)| (u.min(v), u.max(v)))
        .collect();
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < 50 * (extra + 1) {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || !present.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a, b, rng.gen_range(0.1..10.0)));
        added += 1;
    }
    WeightedGraph::new(n, edges)
}

/// Random tree on `n` vertices (random recursive attachment) with weights in
/// `[0.5, 2)`.
pub fn random_tree(n: usize, seed: u64) -> Result<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (1..n)
        .map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.5..2.0)))
        .collect();
    WeightedGraph::new(n, edges)
}

/// Random geometric graph in the unit square: each point is joined to its
/// `k` nearest neighbors with weight `1 / distance`, then leftover
/// components are chained together.
pub fn random_geometric(n: usize, k: usize, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let dist = |a: usize, b: usize| {
        let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
        (dx * dx + dy * dy).sqrt().max(1e-6)
    };
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for a in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&b| b != a).collect();
        order.sort_by(|&x, &y| dist(a, x).total_cmp(&dist(a, y)).then(x.cmp(&y)));
        for &b in order.iter().take(k) {
            if present.insert((a.min(b), a.max(b))) {
                edges.push((a, b, 1.0 / dist(a, b)));
            }
        }
    }
    // Chain components through their lowest-index vertices.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(a, b, _) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut roots: Vec<usize> = (0..n).filter(|&v| find(&mut parent, v) == v).collect();
    roots.sort_unstable();
    for pair in roots.windows(2) {
        edges.push((pair[0], pair[1], 1.0 / dist(pair[0], pair[1])));
    }
    WeightedGraph::new(n, edges)
}

pub fn path(n: usize, w: f64) -> Result<WeightedGraph> {
    WeightedGraph::new(n, (0..n.saturating_sub(1)).map(|v| (v, v + 1, w)))
}

/// Two `k`-cliques of unit edges joined by a single bridge of weight `bridge`.
pub fn two_cliques(k: usize, bridge: f64) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    for base in [0, k] {
        for a in 0..k {
            for b in a + 1..k {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((k - 1, k, bridge));
    WeightedGraph::new(2 * k, edges)
}

/// Random tree plus one chord between two non-adjacent vertices. Returns the
/// graph and the chord's edge index.
pub fn tree_plus_chord(n: usize, seed: u64) -> Result<(WeightedGraph, usize)> {
    if n < 3 {
        return Err(Error::TooSmall(n));
    }
    let tree = random_tree(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| tree.find_edge(a, b).is_none())
        .collect();
    candidates.shuffle(&mut rng);
    let (a, b) = candidates[0];
    let w = rng.gen_range(0.5..2.0);
    let mut edges: Vec<_> = tree.edges().iter().map(|e| (e.p, e.q, e.w)).collect();
    edges.push((a, b, w));
    let chord = edges.len() - 1;
    Ok((WeightedGraph::new(n, edges)?, chord))
}
