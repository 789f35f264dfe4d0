//! Independent Cascade simulation and Monte Carlo estimators for spread,
//! group utilities, and the maximin objective.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure, NodeId};
use crate::rng::substream;

/// A sampled live-edge subgraph: `kept[eid]` says whether edge `eid` fired.
#[derive(Debug, Clone)]
pub struct LiveEdgeGraph {
    pub kept: Vec<bool>,
}

impl LiveEdgeGraph {
    /// Nodes reachable from `seeds` along kept edges, as a membership mask.
    pub fn reachable_from(&self, g: &Graph, seeds: &[NodeId]) -> Vec<bool> {
        debug_assert_eq!(self.kept.len(), g.edge_count());
        let mut active = vec![false; g.node_count()];
        let mut stack: Vec<NodeId> = Vec::new();
        for &s in seeds {
            if !active[s] {
                active[s] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &eid in g.out_edges(u) {
                let v = g.edge(eid).target;
                if self.kept[eid] && !active[v] {
                    active[v] = true;
                    stack.push(v);
                }
            }
        }
        active
    }
}

/// An ordered seed set with a budget. Insertion order is preserved;
/// duplicates are rejected.
#[derive(Debug, Clone)]
pub struct SeedSet {
    nodes: Vec<NodeId>,
    budget: usize,
}

impl SeedSet {
    pub fn new(budget: usize) -> SeedSet {
        SeedSet { nodes: Vec::with_capacity(budget), budget }
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = NodeId>, budget: usize) -> Result<SeedSet> {
        let mut s = SeedSet::new(budget);
        for v in nodes {
            s.insert(v)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, v: NodeId) -> Result<()> {
        if self.nodes.contains(&v) {
            return Err(Error::param(format!("seed {v} already present")));
        }
        if self.nodes.len() == self.budget {
            return Err(Error::param(format!("seed budget {} exhausted", self.budget)));
        }
        self.nodes.push(v);
        Ok(())
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains(&v)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn is_full(&self) -> bool {
        self.nodes.len() == self.budget
    }
}

/// A Monte Carlo estimate: sample mean, sample count, and standard error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub samples: usize,
    pub std_error: f64,
}

/// One cascade's activation sets by step; step 0 is the seed set and the
/// last recorded step is the final nonempty one.
#[derive(Debug, Clone)]
pub struct DiffusionTrace {
    pub activated_by_step: Vec<Vec<NodeId>>,
}

impl DiffusionTrace {
    pub fn activated_count(&self) -> usize {
        self.activated_by_step.iter().map(|s| s.len()).sum()
    }

    pub fn activated(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.activated_by_step.iter().flatten().copied()
    }
}

/// Keeps each edge independently with its probability.
pub fn sample_live_edge(g: &Graph, rng: &mut impl Rng) -> LiveEdgeGraph {
    let kept = (0..g.edge_count()).map(|eid| rng.random::<f64>() < g.prob(eid)).collect();
    LiveEdgeGraph { kept }
}

/// Runs one Independent Cascade from `s`: each node activated at step t-1
/// flips one coin per still-inactive out-neighbor. Stops when a step
/// activates nothing.
pub fn simulate_ic(g: &Graph, s: &SeedSet, rng: &mut impl Rng) -> DiffusionTrace {
    let mut active = vec![false; g.node_count()];
    let mut frontier: Vec<NodeId> = Vec::new();
    for &v in s.nodes() {
        active[v] = true;
        frontier.push(v);
    }
    let mut steps = vec![frontier.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &eid in g.out_edges(u) {
                let v = g.edge(eid).target;
                if !active[v] && rng.random::<f64>() < g.prob(eid) {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        steps.push(next.clone());
        frontier = next;
    }
    DiffusionTrace { activated_by_step: steps }
}

/// Per-simulation activation counts: total and per group. Integer-valued, so
/// parallel aggregation is exact and order-insensitive.
#[derive(Clone)]
struct CascadeCounts {
    total: u64,
    total_sq: u128,
    per_group: Vec<u64>,
    per_group_sq: Vec<u128>,
}

impl CascadeCounts {
    fn zero(m: usize) -> CascadeCounts {
        CascadeCounts { total: 0, total_sq: 0, per_group: vec![0; m], per_group_sq: vec![0; m] }
    }

    fn merge(mut self, other: CascadeCounts) -> CascadeCounts {
        self.total += other.total;
        self.total_sq += other.total_sq;
        for (a, b) in self.per_group.iter_mut().zip(&other.per_group) {
            *a += b;
        }
        for (a, b) in self.per_group_sq.iter_mut().zip(&other.per_group_sq) {
            *a += b;
        }
        self
    }
}

/// Runs `r` simulations with substreams keyed by `(master_seed, "mc", i)` and
/// returns exact integer activation tallies. The reduction is a commutative
/// integer sum, so the result is identical at any worker count.
fn cascade_tallies(
    g: &Graph,
    c: Option<&GroupStructure>,
    s: &SeedSet,
    r: usize,
    master_seed: u64,
) -> CascadeCounts {
    let m = c.map_or(0, |c| c.group_count());
    (0..r as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(master_seed, "mc", &[i]);
            let trace = simulate_ic(g, s, &mut rng);
            let mut counts = CascadeCounts::zero(m);
            counts.total = trace.activated_count() as u64;
            counts.total_sq = (counts.total as u128) * (counts.total as u128);
            if let Some(c) = c {
                for v in trace.activated() {
                    counts.per_group[c.group_of(v)] += 1;
                }
                for (cnt, sq) in counts.per_group.iter().zip(counts.per_group_sq.iter_mut()) {
                    *sq = (*cnt as u128) * (*cnt as u128);
                }
            }
            counts
        })
        .reduce(|| CascadeCounts::zero(m), CascadeCounts::merge)
}

fn mean_and_std_error(sum: u64, sum_sq: u128, r: usize, scale: f64) -> (f64, f64) {
    let mean = sum as f64 / r as f64;
    if r < 2 {
        return (mean * scale, 0.0);
    }
    // Sample variance via Σx² - (Σx)²/R, computed in f64 after exact
    // integer accumulation.
    let var = (sum_sq as f64 - (sum as f64) * (sum as f64) / r as f64) / (r as f64 - 1.0);
    let se = (var.max(0.0) / r as f64).sqrt();
    (mean * scale, se * scale)
}

/// Monte Carlo estimate of the influence spread of `s` over `r` runs.
pub fn estimate_sigma(
    g: &Graph,
    s: &SeedSet,
    r: usize,
    master_seed: u64,
) -> Result<SpreadEstimate> {
    if r == 0 {
        return Err(Error::param("sample count R must be at least 1"));
    }
    let t = cascade_tallies(g, None, s, r, master_seed);
    let (mean, std_error) = mean_and_std_error(t.total, t.total_sq, r, 1.0);
    Ok(SpreadEstimate { mean, samples: r, std_error })
}

/// Per-group utility estimates plus the overall spread, from one batch of
/// simulations shared across all quantities.
#[derive(Debug, Clone)]
pub struct UtilityEstimates {
    pub sigma: SpreadEstimate,
    /// Per-group (mean, std_error) of the influenced fraction of the group.
    pub utilities: Vec<(f64, f64)>,
    /// Minimum of the utility means.
    pub phi: f64,
}

/// Estimates every group's utility `u_c(S)` and the maximin value over `r`
/// simulations. The minimum is taken over the per-group means.
pub fn estimate_group_utilities(
    g: &Graph,
    c: &GroupStructure,
    s: &SeedSet,
    r: usize,
    master_seed: u64,
) -> Result<UtilityEstimates> {
    if r == 0 {
        return Err(Error::param("sample count R must be at least 1"));
    }
    let t = cascade_tallies(g, Some(c), s, r, master_seed);
    let (sigma_mean, sigma_se) = mean_and_std_error(t.total, t.total_sq, r, 1.0);
    let utilities: Vec<(f64, f64)> = (0..c.group_count())
        .map(|gi| {
            mean_and_std_error(t.per_group[gi], t.per_group_sq[gi], r, 1.0 / c.size(gi) as f64)
        })
        .collect();
    let phi = utilities.iter().map(|&(m, _)| m).fold(f64::INFINITY, f64::min);
    Ok(UtilityEstimates {
        sigma: SpreadEstimate { mean: sigma_mean, samples: r, std_error: sigma_se },
        utilities,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng::substream;

    fn chain_p1() -> Graph {
        Graph::from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn certain_edges_always_kept() {
        let g = chain_p1();
        let mut rng = substream(1, "test", &[]);
        for _ in 0..50 {
            assert!(sample_live_edge(&g, &mut rng).kept.iter().all(|&b| b));
        }
    }

    #[test]
    fn impossible_edges_never_kept() {
        let g = Graph::from_weighted_edges(3, [(0, 1, 0.0), (1, 2, 0.0)]).unwrap();
        let mut rng = substream(1, "test", &[]);
        for _ in 0..50 {
            assert!(sample_live_edge(&g, &mut rng).kept.iter().all(|&b| !b));
        }
    }

    #[test]
    fn half_probability_edge_kept_half_the_time() {
        let g = Graph::from_weighted_edges(2, [(0, 1, 0.5)]).unwrap();
        let mut rng = substream(2, "test", &[]);
        let r = 100_000;
        let kept = (0..r).filter(|_| sample_live_edge(&g, &mut rng).kept[0]).count();
        let frac = kept as f64 / r as f64;
        assert!((frac - 0.5).abs() <= 0.01, "kept fraction {frac}");
    }

    #[test]
    fn deterministic_chain_trace() {
        let g = chain_p1();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let mut rng = substream(3, "test", &[]);
        let trace = simulate_ic(&g, &s, &mut rng);
        assert_eq!(trace.activated_by_step, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(trace.activated_count(), 3);
    }

    #[test]
    fn empty_seed_set_activates_nothing() {
        let g = chain_p1();
        let s = SeedSet::new(0);
        let mut rng = substream(4, "test", &[]);
        let trace = simulate_ic(&g, &s, &mut rng);
        assert_eq!(trace.activated_count(), 0);
        assert_eq!(trace.activated_by_step.len(), 1);
    }

    #[test]
    fn trace_steps_are_disjoint() {
        let g = Graph::from_weighted_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5), (2, 3, 0.5)])
            .unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let mut rng = substream(5, "test", &[]);
        for _ in 0..200 {
            let trace = simulate_ic(&g, &s, &mut rng);
            let mut seen = std::collections::HashSet::new();
            for v in trace.activated() {
                assert!(seen.insert(v), "node {v} activated twice");
            }
        }
    }

    #[test]
    fn single_edge_expected_spread() {
        let g = Graph::from_weighted_edges(2, [(0, 1, 0.5)]).unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let est = estimate_sigma(&g, &s, 100_000, 6).unwrap();
        assert!((est.mean - 1.5).abs() <= 0.02, "mean {}", est.mean);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn deterministic_graph_has_zero_variance() {
        let g = chain_p1();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let est = estimate_sigma(&g, &s, 500, 7).unwrap();
        assert_eq!(est.mean, 3.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn empty_seeds_give_zero_spread() {
        let g = chain_p1();
        let est = estimate_sigma(&g, &SeedSet::new(0), 100, 8).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn zero_samples_rejected() {
        let g = chain_p1();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        assert!(estimate_sigma(&g, &s, 0, 9).is_err());
        let c = crate::graph::GroupStructure::single(3);
        assert!(estimate_group_utilities(&g, &c, &s, 0, 9).is_err());
    }

    #[test]
    fn deterministic_chain_utilities() {
        let g = chain_p1();
        let c = crate::graph::GroupStructure::from_membership(vec![0, 0, 1]).unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let est = estimate_group_utilities(&g, &c, &s, 300, 10).unwrap();
        assert_eq!(est.utilities[0].0, 1.0);
        assert_eq!(est.utilities[1].0, 1.0);
        assert_eq!(est.phi, 1.0);
    }

    #[test]
    fn empty_seeds_give_zero_utilities() {
        let g = chain_p1();
        let c = crate::graph::GroupStructure::from_membership(vec![0, 0, 1]).unwrap();
        let est = estimate_group_utilities(&g, &c, &SeedSet::new(0), 100, 11).unwrap();
        assert!(est.utilities.iter().all(|&(m, _)| m == 0.0));
        assert_eq!(est.phi, 0.0);
    }

    #[test]
    fn disconnected_pairs_utilities() {
        let g = Graph::from_weighted_edges(4, [(0, 1, 0.5), (2, 3, 0.5)]).unwrap();
        let c = crate::graph::GroupStructure::from_membership(vec![0, 0, 1, 1]).unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let est = estimate_group_utilities(&g, &c, &s, 100_000, 12).unwrap();
        assert!((est.utilities[0].0 - 0.75).abs() <= 0.01);
        assert_eq!(est.utilities[1].0, 0.0);
        assert_eq!(est.phi, 0.0);
    }

    #[test]
    fn phi_is_minimum_of_means() {
        let g = Graph::from_weighted_edges(4, [(0, 1, 0.3), (0, 2, 0.6), (2, 3, 0.4)]).unwrap();
        let c = crate::graph::GroupStructure::from_membership(vec![0, 0, 1, 1]).unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let est = estimate_group_utilities(&g, &c, &s, 5_000, 13).unwrap();
        let min = est.utilities.iter().map(|&(m, _)| m).fold(f64::INFINITY, f64::min);
        assert_eq!(est.phi, min);
        assert!(est.utilities.iter().all(|&(m, _)| est.phi <= m));
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let g = Graph::from_weighted_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)]).unwrap();
        let s = SeedSet::from_nodes([0], 1).unwrap();
        let a = estimate_sigma(&g, &s, 2_000, 77).unwrap();
        let b = estimate_sigma(&g, &s, 2_000, 77).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn seed_set_rejects_duplicates_and_overflow() {
        let mut s = SeedSet::new(2);
        s.insert(1).unwrap();
        assert!(s.insert(1).is_err());
        s.insert(2).unwrap();
        assert!(s.insert(3).is_err());
        assert!(s.is_full());
    }
}
