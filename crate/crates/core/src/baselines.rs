//! Comparison selectors: group-blind IMM over the whole graph, the myopic
//! minimum-coverage heuristic, and plain greedy on the minimum utility.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{simulate_ic, SeedSet};
use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure, NodeId};
use crate::ris::{
    build_global_pool, compute_theta, greedy_max_cover, ImmParams, PhiScorer, RRSetPool,
};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Imm,
    Myopic,
    Greedy,
}

impl BaselineMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::Imm => "imm",
            BaselineMethod::Myopic => "myopic",
            BaselineMethod::Greedy => "greedy",
        }
    }
}

/// One selection round: the node taken and the score that justified it.
/// The score's meaning is per-method (coverage gain fraction, estimated
/// activation probability, or minimum utility after the pick).
#[derive(Debug, Clone, Serialize)]
pub struct SelectionStep {
    pub node: NodeId,
    pub score: f64,
}

pub struct BaselineResult {
    pub method: BaselineMethod,
    pub seeds: SeedSet,
    pub trace: Vec<SelectionStep>,
}

/// Group-blind IMM: one pool with roots uniform over all nodes, greedy
/// max-coverage on top. This maximizes estimated total spread and anchors
/// the price-of-fairness comparison.
pub fn global_imm(
    g: &Graph,
    k: usize,
    params: &ImmParams,
    master_seed: u64,
) -> Result<BaselineResult> {
    let whole = GroupStructure::single(g.node_count());
    let theta = compute_theta(g, &whole, 0, k, params, master_seed)?;
    let pool = build_global_pool(g, theta, master_seed)?;
    let picks = greedy_max_cover(&pool, k)?;
    let mut seeds = SeedSet::new(k);
    let mut trace = Vec::with_capacity(picks.len());
    for (node, gain) in picks {
        seeds.insert(node)?;
        trace.push(SelectionStep { node, score: gain as f64 / pool.theta() as f64 });
    }
    Ok(BaselineResult { method: BaselineMethod::Imm, seeds, trace })
}

/// Myopic selection: each round estimates every node's activation
/// probability under the current seed set with `r` simulations and seeds
/// the least-covered node, ties to the smallest id.
pub fn myopic(g: &Graph, k: usize, r: usize, master_seed: u64) -> Result<BaselineResult> {
    if k == 0 || k > g.node_count() {
        return Err(Error::param(format!("budget {k} outside 1..={}", g.node_count())));
    }
    if r == 0 {
        return Err(Error::param("at least one simulation per round is required"));
    }
    let mut seeds = SeedSet::new(k);
    let mut trace = Vec::with_capacity(k);
    for t in 0..k {
        let counts = (0..r)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(master_seed, "myopic", &[t as u64, i as u64]);
                let run = simulate_ic(g, &seeds, &mut rng);
                let mut hit = vec![0u64; g.node_count()];
                for v in run.activated() {
                    hit[v] = 1;
                }
                hit
            })
            .reduce(
                || vec![0u64; g.node_count()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let mut best = usize::MAX;
        let mut best_count = u64::MAX;
        for v in 0..g.node_count() {
            if !seeds.contains(v) && counts[v] < best_count {
                best = v;
                best_count = counts[v];
            }
        }
        seeds.insert(best)?;
        trace.push(SelectionStep { node: best, score: best_count as f64 / r as f64 });
    }
    Ok(BaselineResult { method: BaselineMethod::Myopic, seeds, trace })
}

/// Plain greedy on the estimated minimum group utility: every node is a
/// candidate each round, no seed matrix involved. Quadratic in |V| but a
/// useful fairness-aware reference point.
pub fn naive_greedy(pools: &[RRSetPool], k: usize) -> Result<BaselineResult> {
    if pools.is_empty() {
        return Err(Error::param("at least one pool is required"));
    }
    let n = pools[0].node_count();
    if k == 0 || k > n {
        return Err(Error::param(format!("budget {k} outside 1..={n}")));
    }
    let mut seeds = SeedSet::new(k);
    let mut scorer = PhiScorer::new(pools);
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = usize::MAX;
        let mut best_phi = f64::NEG_INFINITY;
        for v in 0..n {
            if seeds.contains(v) {
                continue;
            }
            let phi = scorer.phi_if_added(v);
            if phi > best_phi {
                best = v;
                best_phi = phi;
            }
        }
        seeds.insert(best)?;
        scorer.add(best);
        trace.push(SelectionStep { node: best, score: best_phi });
    }
    Ok(BaselineResult { method: BaselineMethod::Greedy, seeds, trace })
}
