use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::input::build_tree;
use super::{
    load_graph, render, Command, DensifyArgs, OracleArgs, Outcome, PartitionArgs, SolveArgs,
    SparsifyArgs, StatsArgs,
};
use crate::embedding::{aggregate_heat, default_vector_count, rank_edges, EdgeHeat};
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::numeric::rel_diff;
use crate::oracle::{dense_generalized_eigs, dense_trace_ratio};
use crate::partition::{
    fiedler_approx, fiedler_direct, partition_disagreement, sign_cut, FiedlerConfig,
};
use crate::pcg::pcg_solve;
use crate::rng::{self, Purpose};
use crate::similarity::SimilarityEstimate;
use crate::sparsifier::{
    densify, predicted_eigenvalue_after_add, rank_one_gamma, DensifyConfig, RoundRecord,
    Sparsifier, StopReason,
};
use crate::tree::SpanningTree;

type Times = BTreeMap<&'static str, f64>;

fn lap(times: &mut Times, key: &'static str, start: Instant) -> Instant {
    times.insert(key, start.elapsed().as_secs_f64());
    Instant::now()
}

fn densify_config(a: &DensifyArgs, seed: u64) -> DensifyConfig {
    DensifyConfig {
        t: a.t,
        r: a.r,
        seed,
        max_rounds: a.max_rounds,
        max_edges_per_round_fraction: a.round_fraction,
        edge_budget: a.edge_budget,
        ..DensifyConfig::default()
    }
}

fn final_estimate(sp: &Sparsifier) -> SimilarityEstimate {
    sp.history()
        .last()
        .expect("densify records at least one round")
        .estimate
}

fn write_lines<T: std::fmt::Display>(
    path: &Path,
    values: impl IntoIterator<Item = T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for v in values {
        writeln!(out, "{v}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct SparsifyResult<'a> {
    n: usize,
    m: usize,
    dropped_positive_entries: usize,
    tree_total_stretch: f64,
    rounds: usize,
    edges_added_per_round: Vec<usize>,
    offtree_edges: usize,
    initial_lambda_max_est: f64,
    lambda_max_est: f64,
    lambda_min_est: f64,
    sigma2_est: f64,
    lambda_max_reduction: f64,
    density: f64,
    converged: bool,
    stop_reason: Option<StopReason>,
    factorization: &'static str,
    history: &'a [RoundRecord],
}

pub(super) fn sparsify(cmd: &Command, a: &SparsifyArgs) -> Result<Outcome> {
    let mut times = Times::new();
    let start = Instant::now();
    let loaded = load_graph(&a.graph)?;
    let g = &loaded.graph;
    let start = lap(&mut times, "load", start);
    let tree = build_tree(&loaded, a.graph.tree, a.graph.seed)?;
    let tree_total_stretch = tree.total_stretch(g)?;
    let start = lap(&mut times, "tree", start);
    let sp = densify(
        g,
        tree,
        a.densify.sigma2,
        &densify_config(&a.densify, a.graph.seed),
    )?;
    let start = lap(&mut times, "densify", start);
    if let Some(path) = &a.out_mtx {
        sp.write_matrix_market(path)?;
    }
    if let Some(path) = &a.out_edges {
        sp.write_sidecar(g, path)?;
    }
    lap(&mut times, "write", start);

    let history = sp.history();
    let est = final_estimate(&sp);
    let initial = history[0].estimate.lambda_max_est;
    let edges_added_per_round: Vec<usize> = history
        .iter()
        .map(|r| r.edges_added)
        .take_while(|&k| k > 0)
        .collect();
    let budget_met =
        a.densify.edge_budget.is_some() && sp.stop_reason() == Some(StopReason::BudgetExhausted);
    let result = SparsifyResult {
        n: g.n(),
        m: g.m(),
        dropped_positive_entries: loaded.dropped_positive,
        tree_total_stretch,
        rounds: edges_added_per_round.len(),
        edges_added_per_round,
        offtree_edges: sp.offtree_edges().len(),
        initial_lambda_max_est: initial,
        lambda_max_est: est.lambda_max_est,
        lambda_min_est: est.lambda_min_est,
        sigma2_est: est.sigma2_est,
        lambda_max_reduction: initial / est.lambda_max_est,
        density: sp.density(),
        converged: sp.converged(),
        stop_reason: sp.stop_reason(),
        factorization: sp.preconditioner().kind(),
        history,
    };
    Ok(Outcome {
        json: render(cmd, result, times)?,
        success: sp.converged() || budget_met,
    })
}

fn read_vector(path: &Path, n: usize) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(n);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "{}:{}: not a number: {text}",
                path.display(),
                i + 1
            ))
        })?;
        values.push(v);
    }
    if values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: values.len(),
        });
    }
    Ok(values)
}

/// Uniform `[-1, 1)` right-hand side.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, Purpose::Rhs, 0, 0);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[derive(Serialize)]
struct SolveReport {
    iterations: usize,
    relative_residual: f64,
    converged: bool,
    projected_component: f64,
    sparsifier_density: f64,
    sigma2_est: f64,
    residual_history: Vec<f64>,
}

pub(super) fn solve(cmd: &Command, a: &SolveArgs) -> Result<Outcome> {
    let mut times = Times::new();
    let start = Instant::now();
    let loaded = load_graph(&a.graph)?;
    let g = &loaded.graph;
    let b = match &a.rhs {
        Some(path) => read_vector(path, g.n())?,
        None => random_rhs(g.n(), a.random_rhs.unwrap_or(a.graph.seed)),
    };
    let start = lap(&mut times, "load", start);
    let tree = build_tree(&loaded, a.graph.tree, a.graph.seed)?;
    let sp = densify(
        g,
        tree,
        a.densify.sigma2,
        &densify_config(&a.densify, a.graph.seed),
    )?;
    let start = lap(&mut times, "sparsify", start);
    let res = pcg_solve(g, &sp, &b, a.tol, a.max_iters)?;
    let start = lap(&mut times, "solve", start);
    if let Some(path) = &a.out_x {
        write_lines(path, &res.x)?;
    }
    lap(&mut times, "write", start);
    let report = SolveReport {
        iterations: res.iterations,
        relative_residual: res.relative_residual,
        converged: res.converged,
        projected_component: res.projected_component,
        sparsifier_density: sp.density(),
        sigma2_est: final_estimate(&sp).sigma2_est,
        residual_history: res.residual_history,
    };
    Ok(Outcome {
        json: render(cmd, report, times)?,
        success: res.converged,
    })
}

#[derive(Serialize)]
struct PartitionReport {
    balance_ratio: f64,
    cut_weight: f64,
    positive: usize,
    negative: usize,
    disagreement_vs_direct: Option<f64>,
    rayleigh_history: Vec<f64>,
    sparsifier_density: f64,
    sigma2_est: f64,
}

pub(super) fn partition(cmd: &Command, a: &PartitionArgs) -> Result<Outcome> {
    let mut times = Times::new();
    let start = Instant::now();
    let loaded = load_graph(&a.graph)?;
    let g = &loaded.graph;
    let start = lap(&mut times, "load", start);
    let tree = build_tree(&loaded, a.graph.tree, a.graph.seed)?;
    let sp = densify(
        g,
        tree,
        a.densify.sigma2,
        &densify_config(&a.densify, a.graph.seed),
    )?;
    let start = lap(&mut times, "sparsify", start);
    let cfg = FiedlerConfig {
        iters: a.iters,
        seed: a.graph.seed,
        ..FiedlerConfig::default()
    };
    let run = fiedler_approx(g, &sp, &cfg)?;
    let cut = sign_cut(g, &run.vector)?;
    let mut start = lap(&mut times, "fiedler", start);
    let disagreement_vs_direct = if a.compare_direct {
        let direct = sign_cut(g, &fiedler_direct(g, &cfg)?.vector)?;
        start = lap(&mut times, "direct", start);
        Some(partition_disagreement(&cut, &direct)?)
    } else {
        None
    };
    if let Some(path) = &a.out_signs {
        write_lines(path, &cut.signs)?;
    }
    lap(&mut times, "write", start);
    let positive = cut.signs.iter().filter(|&&s| s > 0).count();
    let report = PartitionReport {
        balance_ratio: cut.balance_ratio,
        cut_weight: cut.cut_weight,
        positive,
        negative: g.n() - positive,
        disagreement_vs_direct,
        rayleigh_history: run.rayleigh_history,
        sparsifier_density: sp.density(),
        sigma2_est: final_estimate(&sp).sigma2_est,
    };
    Ok(Outcome {
        json: render(cmd, report, times)?,
        success: true,
    })
}

#[derive(Serialize)]
struct StatsReport {
    n: usize,
    m: usize,
    total_stretch: f64,
    offtree_edges: usize,
    total_heat: f64,
    total_quadratic_gap: f64,
    heat_identity_rel_error: f64,
    /// `(k, count)`: off-tree edges with stretch in `[2^k, 2^(k+1))`.
    stretch_histogram: Vec<(i32, usize)>,
    hottest: Vec<EdgeHeat>,
}

fn stretches(g: &WeightedGraph, tree: &SpanningTree) -> Result<Vec<f64>> {
    g.edges()
        .iter()
        .map(|e| tree.edge_stretch(e.p, e.q, e.w))
        .collect()
}

pub(super) fn stats(cmd: &Command, a: &StatsArgs) -> Result<Outcome> {
    let mut times = Times::new();
    let start = Instant::now();
    let loaded = load_graph(&a.graph)?;
    let g = &loaded.graph;
    let start = lap(&mut times, "load", start);
    let tree = build_tree(&loaded, a.graph.tree, a.graph.seed)?;
    let stretch = stretches(g, &tree)?;
    let sp = Sparsifier::from_tree(g, tree)?;
    let start = lap(&mut times, "tree", start);
    let r = a.r.unwrap_or_else(|| default_vector_count(g.n()));
    let hr = aggregate_heat(g, &sp, a.t, r, a.graph.seed, 0)?;
    let start = lap(&mut times, "heat", start);
    if let Some(path) = &a.heat_table {
        hr.write_table_file(path)?;
    }
    if let Some(path) = &a.stretch_table {
        let tree = sp.tree();
        let rows = g.edges().iter().enumerate().map(|(i, e)| {
            let kind = if tree.is_tree_edge(i) {
                "tree"
            } else {
                "offtree"
            };
            format!("{i}\t{}\t{}\t{}\t{}\t{kind}", e.p, e.q, e.w, stretch[i])
        });
        write_lines(
            path,
            std::iter::once("# edge\tp\tq\tw\tstretch\tkind".to_string()).chain(rows),
        )?;
    }
    lap(&mut times, "write", start);

    let mut hist = BTreeMap::new();
    for (i, &s) in stretch.iter().enumerate() {
        if !sp.tree().is_tree_edge(i) {
            *hist.entry(s.log2().floor() as i32).or_insert(0) += 1;
        }
    }
    let ranked = rank_edges(&hr);
    let report = StatsReport {
        n: g.n(),
        m: g.m(),
        total_stretch: stretch.iter().sum(),
        offtree_edges: hr.edges.len(),
        total_heat: hr.total_heat(),
        total_quadratic_gap: hr.total_quadratic_gap(),
        heat_identity_rel_error: rel_diff(hr.total_heat(), hr.total_quadratic_gap()),
        stretch_histogram: hist.into_iter().collect(),
        hottest: ranked.into_iter().take(10).collect(),
    };
    Ok(Outcome {
        json: render(cmd, report, times)?,
        success: true,
    })
}

const TRACE_TOL: f64 = 1e-8;
const MONOTONE_TOL: f64 = 1e-8;
const RANK_ONE_TOL: f64 = 1e-6;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    /// Largest violation relative to the check's tolerance scale.
    worst: f64,
    detail: String,
}

#[derive(Serialize)]
struct OracleReport {
    n: usize,
    m: usize,
    passed: bool,
    checks: Vec<Check>,
}

fn graph_from_edges(
    g: &WeightedGraph,
    edges: impl IntoIterator<Item = Edge>,
) -> Result<WeightedGraph> {
    WeightedGraph::with_self_weights(
        g.n(),
        edges.into_iter().map(|e| (e.p, e.q, e.w)),
        g.self_weights().to_vec(),
    )
}

pub(super) fn oracle_check(cmd: &Command, a: &OracleArgs) -> Result<Outcome> {
    let mut times = Times::new();
    let start = Instant::now();
    let loaded = load_graph(&a.graph)?;
    let g = &loaded.graph;
    let tree = build_tree(&loaded, a.graph.tree, a.graph.seed)?;
    let tree_ids = tree.edge_ids();
    let tree_graph = g.edge_subgraph(&tree_ids)?;
    let mut checks = Vec::new();

    let trace = dense_trace_ratio(g, &tree_graph)?;
    let stretch = tree.total_stretch(g)?;
    let err = rel_diff(trace, stretch);
    checks.push(Check {
        name: "trace_identity",
        passed: err <= TRACE_TOL,
        worst: err,
        detail: format!("trace {trace:.12e}, total stretch {stretch:.12e}"),
    });
    let start = lap(&mut times, "trace", start);

    let sp = Sparsifier::from_tree(g, tree.clone())?;
    let ranked: Vec<usize> = if g.m() > tree_ids.len() {
        let r = default_vector_count(g.n());
        rank_edges(&aggregate_heat(g, &sp, 2, r, a.graph.seed, 0)?)
            .into_iter()
            .map(|e| e.edge)
            .collect()
    } else {
        Vec::new()
    };

    // eigenvalues after each single-edge addition, compared position by position
    let steps = a.steps.min(ranked.len());
    let mut ids = tree_ids.clone();
    let mut before = dense_generalized_eigs(g, &tree_graph)?.eigenvalues;
    let mut worst: f64 = 0.0;
    let mut where_worst = String::from("no increase");
    for (k, &e) in ranked.iter().take(steps).enumerate() {
        ids.push(e);
        let mut edges: Vec<Edge> = ids.iter().map(|&i| g.edge(i)).collect();
        if a.corrupt && k == 0 {
            edges[0].w *= 0.1;
        }
        let p = graph_from_edges(g, edges)?;
        let after = dense_generalized_eigs(g, &p)?.eigenvalues;
        for (i, (x, y)) in after.iter().zip(&before).enumerate() {
            let excess = (x - y) / y.abs().max(1.0);
            if excess > worst {
                worst = excess;
                where_worst = format!(
                    "step {} (edge {e}), eigenvalue {i}: {y:.12e} -> {x:.12e}",
                    k + 1
                );
            }
        }
        before = after;
    }
    checks.push(Check {
        name: "eigenvalue_monotonicity",
        passed: worst <= MONOTONE_TOL,
        worst,
        detail: if steps == 0 {
            "no off-tree edges".into()
        } else {
            format!("{steps} additions; {where_worst}")
        },
    });
    let start = lap(&mut times, "monotonicity", start);

    // the tree plus one chord has a single non-unit eigenvalue, which the
    // rank-one update sends to 1 when the chord joins the sparsifier
    if let Some(&e) = ranked.first() {
        let edge = g.edge(e);
        let chorded = graph_from_edges(g, tree_ids.iter().map(|&i| g.edge(i)).chain([edge]))?;
        let spec = dense_generalized_eigs(&chorded, &tree_graph)?;
        let gamma = rank_one_gamma(&edge, &spec.eigenvectors[0])?;
        let predicted = predicted_eigenvalue_after_add(spec.lambda_max(), edge.w, gamma);
        let actual = dense_generalized_eigs(&chorded, &chorded)?.lambda_max();
        let err = rel_diff(predicted, actual);
        checks.push(Check {
            name: "rank_one",
            passed: err <= RANK_ONE_TOL,
            worst: err,
            detail: format!(
                "edge {e}: lambda {:.9e} -> predicted {predicted:.9e}, actual {actual:.9e}",
                spec.lambda_max()
            ),
        });
    } else {
        checks.push(Check {
            name: "rank_one",
            passed: true,
            worst: 0.0,
            detail: "no off-tree edges".into(),
        });
    }
    lap(&mut times, "rank_one", start);

    let passed = checks.iter().all(|c| c.passed);
    let report = OracleReport {
        n: g.n(),
        m: g.m(),
        passed,
        checks,
    };
    Ok(Outcome {
        json: render(cmd, report, times)?,
        success: passed,
    })
}
