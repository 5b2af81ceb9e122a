//! Joule-heat embedding of off-tree edges.
//!
//! A few steps of generalized power iteration `h ← L_P^{-1} L_G h` amplify
//! the dominant generalized eigenvectors of a random start vector. An
//! off-tree edge is spectrally critical when it dissipates a lot of heat
//! `w (h(p) - h(q))^2` under the resulting node voltages.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexVector, WeightedGraph};
use crate::numeric::{project_out_ones, CompensatedSum};
use crate::rng::{self, Purpose};
use crate::similarity::rademacher;
use crate::solver::LaplacianSolver;
use crate::sparsifier::Sparsifier;

pub const DEFAULT_STEPS: usize = 2;

/// `max(4, ⌈log2 n⌉)`.
pub fn default_vector_count(n: usize) -> usize {
    let log = usize::BITS - n.saturating_sub(1).leading_zeros();
    (log as usize).max(4)
}

/// `h_t = (L_P^{-1} L_G)^t h0`, each iterate projected orthogonal to the
/// all-ones vector when `L_G` is singular.
pub fn generalized_power_iterate<S: LaplacianSolver + ?Sized>(
    g: &WeightedGraph,
    solver: &S,
    h0: &[f64],
    t: usize,
) -> Result<VertexVector> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "power iteration needs t >= 1".into(),
        ));
    }
    if h0.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: h0.len(),
        });
    }
    if h0.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidArgument("start vector is zero".into()));
    }
    let singular = !g.has_self_weights();
    let mut h = h0.to_vec();
    if singular {
        project_out_ones(&mut h);
    }
    for _ in 0..t {
        h = solver.solve(&g.laplacian_apply(&h)?)?;
        if singular {
            project_out_ones(&mut h);
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeHeat {
    /// Index in the original graph.
    pub edge: usize,
    pub p: usize,
    pub q: usize,
    pub w: f64,
    pub raw_heat: f64,
    pub normalized_heat: f64,
}

/// Heats of all edges of `G` that are not in the sparsifier, in edge order.
#[derive(Debug, Clone, Serialize)]
pub struct HeatReport {
    pub edges: Vec<EdgeHeat>,
    pub t: usize,
    pub r: usize,
    pub seed: u64,
    /// `h^T (L_G - L_P) h` for each power-iterated vector.
    pub quadratic_gaps: Vec<f64>,
}

impl HeatReport {
    fn from_raw(
        edges: Vec<EdgeHeat>,
        t: usize,
        r: usize,
        seed: u64,
        quadratic_gaps: Vec<f64>,
    ) -> Self {
        let mut report = HeatReport {
            edges,
            t,
            r,
            seed,
            quadratic_gaps,
        };
        report.normalize();
        report
    }

    // exactly one edge gets normalized heat 1: the first maximum by index
    fn normalize(&mut self) {
        let Some(top) = self.argmax() else { return };
        let max = self.edges[top].raw_heat;
        for (i, e) in self.edges.iter_mut().enumerate() {
            e.normalized_heat = if max > 0.0 {
                let v = e.raw_heat / max;
                if i != top && v >= 1.0 {
                    1.0 - f64::EPSILON / 2.0
                } else {
                    v
                }
            } else {
                0.0
            };
        }
        self.edges[top].normalized_heat = if max > 0.0 { 1.0 } else { 0.0 };
    }

    fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, e) in self.edges.iter().enumerate() {
            if best.is_none_or(|b| e.raw_heat > self.edges[b].raw_heat) {
                best = Some(i);
            }
        }
        best
    }

    pub fn total_heat(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.raw_heat)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn total_quadratic_gap(&self) -> f64 {
        self.quadratic_gaps
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn max_heat(&self) -> f64 {
        self.argmax().map_or(0.0, |i| self.edges[i].raw_heat)
    }

    /// Tab-separated `edge p q w raw_heat normalized_heat` rows in rank order.
    pub fn write_table<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "edge\tp\tq\tw\traw_heat\tnormalized_heat")?;
        for e in rank_edges(self) {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:e}\t{:e}",
                e.edge, e.p, e.q, e.w, e.raw_heat, e.normalized_heat
            )?;
        }
        Ok(())
    }

    pub fn write_table_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_table(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

fn offtree_edges(g: &WeightedGraph, sp: &Sparsifier) -> Vec<usize> {
    (0..g.m()).filter(|&e| !sp.contains(e)).collect()
}

fn check_dims(g: &WeightedGraph, sp: &Sparsifier) -> Result<()> {
    if sp.n() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: sp.n(),
        });
    }
    Ok(())
}

/// Heats of every edge outside the sparsifier for one voltage vector.
pub fn edge_joule_heat(g: &WeightedGraph, sp: &Sparsifier, h: &[f64]) -> Result<HeatReport> {
    check_dims(g, sp)?;
    if h.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: h.len(),
        });
    }
    let edges = offtree_edges(g, sp)
        .into_iter()
        .map(|e| {
            let edge = g.edge(e);
            let d = h[edge.p] - h[edge.q];
            EdgeHeat {
                edge: e,
                p: edge.p,
                q: edge.q,
                w: edge.w,
                raw_heat: edge.w * d * d,
                normalized_heat: 0.0,
            }
        })
        .collect();
    let gap = g.quadratic_form(h)? - sp.graph().quadratic_form(h)?;
    Ok(HeatReport::from_raw(edges, 0, 1, 0, vec![gap]))
}

/// Sums edge heats over `r` Rademacher start vectors pushed through `t`
/// power steps. Vectors are processed in parallel and merged in index order,
/// so the result does not depend on the thread count.
pub fn aggregate_heat(
    g: &WeightedGraph,
    sp: &Sparsifier,
    t: usize,
    r: usize,
    seed: u64,
    round: u64,
) -> Result<HeatReport> {
    check_dims(g, sp)?;
    if r == 0 {
        return Err(Error::InvalidArgument(
            "need at least one random vector".into(),
        ));
    }
    let ids = offtree_edges(g, sp);
    let singular = !g.has_self_weights();
    let mut sums = vec![CompensatedSum::new(); ids.len()];
    let mut gaps = Vec::with_capacity(r);
    let batch = rayon::current_num_threads().max(1);
    let mut start = 0;
    while start < r {
        let end = (start + batch).min(r);
        let results: Vec<Result<(Vec<f64>, f64)>> = (start..end)
            .into_par_iter()
            .map(|j| {
                let mut rng = rng::stream(seed, Purpose::HeatVectors, round, j as u64);
                let h0 = rademacher(g.n(), singular, &mut rng);
                let h = generalized_power_iterate(g, sp, &h0, t)?;
                let heats = ids
                    .iter()
                    .map(|&e| {
                        let edge = g.edge(e);
                        let d = h[edge.p] - h[edge.q];
                        edge.w * d * d
                    })
                    .collect();
                let gap = g.quadratic_form(&h)? - sp.graph().quadratic_form(&h)?;
                Ok((heats, gap))
            })
            .collect();
        for res in results {
            let (heats, gap) = res?;
            for (acc, x) in sums.iter_mut().zip(heats) {
                acc.add(x);
            }
            gaps.push(gap);
        }
        start = end;
    }
    let edges = ids
        .iter()
        .zip(&sums)
        .map(|(&e, s)| {
            let edge = g.edge(e);
            EdgeHeat {
                edge: e,
                p: edge.p,
                q: edge.q,
                w: edge.w,
                raw_heat: s.value(),
                normalized_heat: 0.0,
            }
        })
        .collect();
    Ok(HeatReport::from_raw(edges, t, r, seed, gaps))
}

/// Edges by descending raw heat, ties by ascending edge index.
pub fn rank_edges(hr: &HeatReport) -> Vec<EdgeHeat> {
    let mut ranked = hr.edges.clone();
    ranked.sort_by(|a, b| b.raw_heat.total_cmp(&a.raw_heat).then(a.edge.cmp(&b.edge)));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{self, Weighting};
    use crate::tree::{hair_comb, max_weight};

    fn triangle() -> (WeightedGraph, Sparsifier) {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let t = max_weight(&g).unwrap();
        let sp = Sparsifier::from_tree(&g, t).unwrap();
        (g, sp)
    }

    #[test]
    fn vector_count_default() {
        assert_eq!(default_vector_count(3), 4);
        assert_eq!(default_vector_count(16), 4);
        assert_eq!(default_vector_count(40_000), 16);
        assert_eq!(default_vector_count(1 << 20), 20);
        assert_eq!(default_vector_count((1 << 20) + 1), 21);
    }

    #[test]
    fn identity_preconditioning_projects_only() {
        let g = generate::random_connected(30, 4.0, 3).unwrap();
        let solver = crate::oracle::DenseSolver::new(&g).unwrap();
        let h0: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        let mut expect = h0.clone();
        project_out_ones(&mut expect);
        let h = generalized_power_iterate(&g, &solver, &h0, 3).unwrap();
        for (a, b) in h.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_rayleigh_ratio_reaches_three() {
        let (g, sp) = triangle();
        let h0 = [0.9, -1.3, 0.4];
        let h = generalized_power_iterate(&g, &sp, &h0, 4).unwrap();
        let ratio = g.quadratic_form(&h).unwrap() / sp.graph().quadratic_form(&h).unwrap();
        assert!((ratio - 3.0).abs() <= 0.06, "{ratio}");
        assert!(generalized_power_iterate(&g, &sp, &h0, 0).is_err());
    }

    #[test]
    fn triangle_single_vector_heat() {
        let (g, sp) = triangle();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hr = edge_joule_heat(&g, &sp, &[s, 0.0, -s]).unwrap();
        assert_eq!(hr.edges.len(), 1);
        assert_eq!(hr.edges[0].edge, 2);
        assert!((hr.edges[0].raw_heat - 2.0).abs() < 1e-15);
        assert_eq!(hr.edges[0].normalized_heat, 1.0);
        assert!((hr.total_heat() - hr.total_quadratic_gap()).abs() < 1e-14);
        let flat = edge_joule_heat(&g, &sp, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(flat.edges[0].raw_heat, 0.0);
    }

    #[test]
    fn aggregate_is_deterministic_and_sums_match() {
        let g = generate::grid(20, 20, Weighting::UniformRandom(9)).unwrap();
        let sp = Sparsifier::from_tree(&g, max_weight(&g).unwrap()).unwrap();
        let a = aggregate_heat(&g, &sp, 2, 6, 11, 0).unwrap();
        let b = aggregate_heat(&g, &sp, 2, 6, 11, 0).unwrap();
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.quadratic_gaps.len(), 6);
        let (h, q) = (a.total_heat(), a.total_quadratic_gap());
        assert!((h - q).abs() <= 1e-10 * q, "{h} vs {q}");
        assert_eq!(
            a.edges.iter().filter(|e| e.normalized_heat == 1.0).count(),
            1
        );
        assert!(a
            .edges
            .iter()
            .all(|e| (0.0..=1.0).contains(&e.normalized_heat)));
    }

    #[test]
    fn ties_rank_by_index() {
        let mut hr = HeatReport::from_raw(
            [(4, 2.0), (1, 2.0), (7, 5.0)]
                .iter()
                .map(|&(edge, raw_heat)| EdgeHeat {
                    edge,
                    p: 0,
                    q: 1,
                    w: 1.0,
                    raw_heat,
                    normalized_heat: 0.0,
                })
                .collect(),
            1,
            1,
            0,
            vec![9.0],
        );
        let order: Vec<usize> = rank_edges(&hr).iter().map(|e| e.edge).collect();
        assert_eq!(order, [7, 1, 4]);
        hr.edges[2].raw_heat = 2.0;
        hr.normalize();
        assert_eq!(
            hr.edges.iter().filter(|e| e.normalized_heat == 1.0).count(),
            1
        );
        assert_eq!(hr.edges[0].normalized_heat, 1.0);
    }

    #[test]
    fn hair_comb_heat_concentrates_at_the_top() {
        let (rows, cols) = (40, 40);
        let g = generate::grid(rows, cols, Weighting::Unit).unwrap();
        let sp = Sparsifier::from_tree(&g, hair_comb(&g, rows, cols).unwrap()).unwrap();
        let hr = aggregate_heat(&g, &sp, 2, 8, 42, 0).unwrap();
        let mut per_row = vec![0.0; rows];
        for e in &hr.edges {
            per_row[e.p / cols] += e.raw_heat;
        }
        assert!(per_row.windows(2).all(|w| w[0] >= w[1]), "{per_row:?}");
        assert!(per_row[0] > 100.0 * per_row[rows - 2]);
    }

    #[test]
    fn table_rows_are_sorted() {
        let g = generate::grid(8, 8, Weighting::Unit).unwrap();
        let sp = Sparsifier::from_tree(&g, max_weight(&g).unwrap()).unwrap();
        let hr = aggregate_heat(&g, &sp, 2, 4, 1, 0).unwrap();
        let mut buf = Vec::new();
        hr.write_table(&mut buf).unwrap();
        let heats: Vec<f64> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split('\t').nth(4).unwrap().parse().unwrap())
            .collect();
        assert_eq!(heats.len(), g.m() - 63);
        assert!(heats.windows(2).all(|w| w[0] >= w[1]));
    }
}
