use std::time::Instant;

use log::{debug, info};
use serde::Serialize;

use super::Sparsifier;
use crate::embedding::{
    aggregate_heat, default_vector_count, rank_edges, EdgeHeat, HeatReport, DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::DEFAULT_SEED;
use crate::similarity::{
    heat_threshold, random_block, unique_edge_budget, SimilarityEstimate, DEFAULT_BLOCK_SIZE,
};
use crate::tree::SpanningTree;

/// Relative roundoff allowance when comparing σ² estimates, both against
/// the target and between rounds.
pub const ESTIMATE_SLACK: f64 = 1e-9;

/// `λ_max` iterations per round. The loop needs estimates that are accurate
/// well beyond the standalone defaults so that successive rounds compare
/// meaningfully.
pub const DENSIFY_LAMBDA_MAX_ITERS: usize = 50;
pub const DENSIFY_LAMBDA_MAX_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensifyConfig {
    /// Power-iteration steps per heat vector.
    pub t: usize,
    /// Random vectors per round; `None` picks `max(4, ⌈log2 n⌉)`.
    pub r: Option<usize>,
    pub seed: u64,
    pub max_rounds: usize,
    /// Per-round cap on recovered edges as a fraction of `n` (at least one).
    pub max_edges_per_round_fraction: f64,
    /// Cap on the total number of recovered edges.
    pub edge_budget: Option<usize>,
    pub lambda_max_iters: usize,
    pub lambda_max_tol: f64,
    /// Vectors in the `λ_max` subspace iteration.
    pub lambda_max_block: usize,
}

impl Default for DensifyConfig {
    fn default() -> Self {
        DensifyConfig {
            t: DEFAULT_STEPS,
            r: None,
            seed: DEFAULT_SEED,
            max_rounds: 20,
            max_edges_per_round_fraction: 0.02,
            edge_budget: None,
            lambda_max_iters: DENSIFY_LAMBDA_MAX_ITERS,
            lambda_max_tol: DENSIFY_LAMBDA_MAX_TOL,
            lambda_max_block: DEFAULT_BLOCK_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxRounds,
    BudgetExhausted,
    NoCandidates,
}

/// One pass of the densification loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub estimate: SimilarityEstimate,
    /// Edges in the sparsifier when the estimate was taken.
    pub edge_count: usize,
    pub threshold: Option<f64>,
    pub candidates: usize,
    pub edges_added: usize,
    /// `⌈2 λ_max / (σ² λ_min) - 1⌉`, reported but not enforced.
    pub advisory_budget: usize,
    pub factorization: &'static str,
    #[serde(skip)]
    pub seconds: f64,
}

/// Candidates whose normalized heat reaches `theta`, in rank order.
pub fn filter_edges(hr: &HeatReport, theta: f64) -> Vec<EdgeHeat> {
    rank_edges(hr)
        .into_iter()
        .filter(|e| e.normalized_heat >= theta)
        .collect()
}

/// Greedy scan in rank order keeping only edges whose tree-path bottleneck
/// has not been claimed by an earlier accepted edge. Stops once `limit`
/// edges are accepted.
pub fn deduplicate_similar(
    candidates: &[EdgeHeat],
    tree: &SpanningTree,
    limit: usize,
) -> Result<Vec<EdgeHeat>> {
    let mut claimed = std::collections::HashSet::new();
    let mut accepted = Vec::new();
    for c in candidates {
        if accepted.len() == limit {
            break;
        }
        if claimed.insert(tree.bottleneck(c.p, c.q)?) {
            accepted.push(*c);
        }
    }
    Ok(accepted)
}

/// Recovers heat-ranked off-tree edges round by round until the estimated
/// `σ² = λ_max / λ_min` reaches `target_sigma2`.
///
/// Running out of rounds is not an error; check [`Sparsifier::converged`].
pub fn densify(
    g: &WeightedGraph,
    tree: SpanningTree,
    target_sigma2: f64,
    cfg: &DensifyConfig,
) -> Result<Sparsifier> {
    if !(target_sigma2 >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target sigma^2 {target_sigma2} below 1"
        )));
    }
    if cfg.t == 0 || cfg.r == Some(0) || cfg.lambda_max_block == 0 {
        return Err(Error::InvalidArgument(
            "t, r and the block size must be positive".into(),
        ));
    }
    if !(cfg.max_edges_per_round_fraction > 0.0) {
        return Err(Error::InvalidArgument(
            "per-round edge fraction must be positive".into(),
        ));
    }
    let n = g.n();
    let r = cfg.r.unwrap_or_else(|| default_vector_count(n));
    let cap = ((cfg.max_edges_per_round_fraction * n as f64).ceil() as usize).max(1);
    let mut sp = Sparsifier::from_tree(g, tree)?;
    let mut history = Vec::new();
    let mut round = 0;
    // each round's subspace iteration starts from the previous round's
    // Ritz vectors
    let mut warm = random_block(g, cfg.seed, cfg.lambda_max_block);
    let reason = loop {
        let start = Instant::now();
        let (estimate, last) = SimilarityEstimate::compute_from(
            g,
            sp.graph(),
            &sp,
            warm,
            cfg.lambda_max_iters,
            cfg.lambda_max_tol,
        )?;
        warm = last;
        let mut record = RoundRecord {
            round,
            estimate,
            edge_count: sp.edge_count(),
            threshold: None,
            candidates: 0,
            edges_added: 0,
            advisory_budget: unique_edge_budget(
                estimate.lambda_max_est,
                target_sigma2 * estimate.lambda_min_est,
            ),
            factorization: sp.preconditioner().kind(),
            seconds: 0.0,
        };
        info!(
            "round {round}: sigma2 {:.4e} (lambda_max {:.4e}, lambda_min {:.4}), {} edges",
            estimate.sigma2_est,
            estimate.lambda_max_est,
            estimate.lambda_min_est,
            sp.edge_count()
        );
        let remaining = cfg
            .edge_budget
            .map(|b| b.saturating_sub(sp.offtree_edges().len()));
        let stop = if estimate.sigma2_est <= target_sigma2 * (1.0 + ESTIMATE_SLACK) {
            Some(StopReason::Converged)
        } else if round == cfg.max_rounds {
            Some(StopReason::MaxRounds)
        } else if remaining == Some(0) {
            Some(StopReason::BudgetExhausted)
        } else {
            None
        };
        if let Some(reason) = stop {
            record.seconds = start.elapsed().as_secs_f64();
            history.push(record);
            break reason;
        }

        let hr = aggregate_heat(g, &sp, cfg.t, r, cfg.seed, round as u64)?;
        let theta = heat_threshold(
            target_sigma2,
            estimate.lambda_min_est,
            estimate.lambda_max_est,
            cfg.t,
        );
        let candidates = filter_edges(&hr, theta);
        let take = cap.min(remaining.unwrap_or(usize::MAX));
        let accepted = deduplicate_similar(&candidates, sp.tree(), take)?;
        let chosen: Vec<usize> = accepted.iter().map(|e| e.edge).collect();
        debug!(
            "round {round}: threshold {theta:.3e}, {} candidates, adding {}",
            candidates.len(),
            chosen.len()
        );
        record.threshold = Some(theta);
        record.candidates = candidates.len();
        record.edges_added = chosen.len();
        if chosen.is_empty() {
            record.seconds = start.elapsed().as_secs_f64();
            history.push(record);
            break StopReason::NoCandidates;
        }
        sp.add_edges(g, &chosen, round)?;
        record.seconds = start.elapsed().as_secs_f64();
        history.push(record);
        round += 1;
    };
    sp.finish(history, reason);
    Ok(sp)
}
