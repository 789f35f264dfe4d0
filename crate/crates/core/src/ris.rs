//! Reverse influence sampling: RR-set generation, per-group pools with an
//! inverted node-to-set index, IMM-style sample-size control, and greedy
//! max-coverage selection over a pool.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, GroupStructure, NodeId};
use crate::rng::substream;

/// Nodes that reach `root` in one sampled transpose live-edge graph.
#[derive(Debug, Clone)]
pub struct RRSet {
    pub root: NodeId,
    pub members: Vec<NodeId>,
}

/// A batch of RR sets rooted in one group (or in all of V for global pools),
/// plus an inverted index from node to the sets containing it.
///
/// The estimator contract: `coverage_utility(S)` = covered sets / theta is an
/// unbiased estimator of `u_c(S)`.
#[derive(Debug, Clone)]
pub struct RRSetPool {
    group: Option<usize>,
    group_size: usize,
    node_count: usize,
    sets: Vec<RRSet>,
    index: Vec<Vec<u32>>,
}

/// IMM sampling parameters. `epsilon` and `ell` control the approximation
/// guarantee; `theta_override` bypasses the two-phase estimate entirely and
/// `theta_min` floors it.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ImmParams {
    pub epsilon: f64,
    pub ell: f64,
    pub theta_override: Option<usize>,
    pub theta_min: usize,
}

impl Default for ImmParams {
    fn default() -> ImmParams {
        ImmParams { epsilon: 0.1, ell: 1.0, theta_override: None, theta_min: 1_000 }
    }
}

impl ImmParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 || self.epsilon >= 1.0 || self.epsilon.is_nan() {
            return Err(Error::param(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        if self.ell <= 0.0 || self.ell.is_nan() {
            return Err(Error::param(format!("ell {} must be positive", self.ell)));
        }
        if self.theta_override == Some(0) {
            return Err(Error::param("theta_override must be at least 1"));
        }
        Ok(())
    }
}

fn reverse_bfs(
    g: &Graph,
    root: NodeId,
    rng: &mut impl Rng,
    mut audit: Option<&mut Vec<(EdgeId, bool)>>,
) -> Vec<NodeId> {
    let mut visited = vec![false; g.node_count()];
    visited[root] = true;
    let mut members = vec![root];
    let mut head = 0usize;
    while head < members.len() {
        let v = members[head];
        head += 1;
        for &eid in g.in_edges(v) {
            let u = g.edge(eid).source;
            if visited[u] {
                continue;
            }
            // Lazy coin: each edge is examined at most once per sample
            // because its target is dequeued exactly once.
            let kept = rng.random::<f64>() < g.prob(eid);
            if let Some(log) = audit.as_mut() {
                log.push((eid, kept));
            }
            if kept {
                visited[u] = true;
                members.push(u);
            }
        }
    }
    members
}

/// Samples one RR set by reverse randomized BFS from `root`.
pub fn generate_rr_set(g: &Graph, root: NodeId, rng: &mut impl Rng) -> RRSet {
    RRSet { root, members: reverse_bfs(g, root, rng, None) }
}

/// Like [`generate_rr_set`] but also returns the coin flips it made, for
/// audits that re-derive the member set from the realized live edges.
pub fn generate_rr_set_audited(
    g: &Graph,
    root: NodeId,
    rng: &mut impl Rng,
) -> (RRSet, Vec<(EdgeId, bool)>) {
    let mut log = Vec::new();
    let members = reverse_bfs(g, root, rng, Some(&mut log));
    (RRSet { root, members }, log)
}

impl RRSetPool {
    fn assemble(
        group: Option<usize>,
        group_size: usize,
        node_count: usize,
        sets: Vec<RRSet>,
    ) -> RRSetPool {
        let mut index = vec![Vec::new(); node_count];
        for (si, set) in sets.iter().enumerate() {
            for &v in &set.members {
                index[v].push(si as u32);
            }
        }
        RRSetPool { group, group_size, node_count, sets, index }
    }

    /// Builds a pool from pre-generated sets, validating that each root is a
    /// member of its own set and that all ids are in range.
    pub fn from_sets(
        group: Option<usize>,
        group_size: usize,
        node_count: usize,
        sets: Vec<RRSet>,
    ) -> Result<RRSetPool> {
        if group_size == 0 || group_size > node_count {
            return Err(Error::param("group_size must be in 1..=node_count"));
        }
        for set in &sets {
            if !set.members.contains(&set.root) {
                return Err(Error::param(format!("root {} missing from its own set", set.root)));
            }
            if set.members.iter().any(|&v| v >= node_count) {
                return Err(Error::param("set member outside the node range"));
            }
        }
        Ok(RRSetPool::assemble(group, group_size, node_count, sets))
    }

    pub fn group(&self) -> Option<usize> {
        self.group
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn theta(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[RRSet] {
        &self.sets
    }

    pub fn sets_containing(&self, v: NodeId) -> &[u32] {
        &self.index[v]
    }

    /// Number of sets intersecting `seeds`.
    pub fn covered_count(&self, seeds: &[NodeId]) -> usize {
        let mut covered = vec![false; self.sets.len()];
        let mut count = 0usize;
        for &v in seeds {
            for &si in &self.index[v] {
                if !covered[si as usize] {
                    covered[si as usize] = true;
                    count += 1;
                }
            }
        }
        count
    }

    /// Fraction of sets intersecting `seeds`; the pool's estimate of `u_c`.
    pub fn coverage_utility(&self, seeds: &[NodeId]) -> f64 {
        if self.sets.is_empty() {
            return 0.0;
        }
        self.covered_count(seeds) as f64 / self.sets.len() as f64
    }
}

fn build_pool(
    g: &Graph,
    universe: &[NodeId],
    group: Option<usize>,
    group_size: usize,
    theta: usize,
    master_seed: u64,
    domain: &str,
    index_prefix: &[u64],
) -> Result<RRSetPool> {
    if theta == 0 {
        return Err(Error::param("theta must be at least 1"));
    }
    if universe.is_empty() {
        return Err(Error::data("cannot root RR sets in an empty group"));
    }
    let sets: Vec<RRSet> = (0..theta as u64)
        .into_par_iter()
        .map(|i| {
            let mut indices = index_prefix.to_vec();
            indices.push(i);
            let mut rng = substream(master_seed, domain, &indices);
            let root = universe[rng.random_range(0..universe.len())];
            generate_rr_set(g, root, &mut rng)
        })
        .collect();
    Ok(RRSetPool::assemble(group, group_size, g.node_count(), sets))
}

/// Builds `theta` RR sets with roots uniform over group `group`.
/// Substreams are keyed by `(master_seed, "rr", group, i)`, so the pool is
/// identical at any worker count.
pub fn build_group_pool(
    g: &Graph,
    c: &GroupStructure,
    group: usize,
    theta: usize,
    master_seed: u64,
) -> Result<RRSetPool> {
    if group >= c.group_count() {
        return Err(Error::param(format!("group {group} out of range")));
    }
    build_pool(
        g,
        c.members(group),
        Some(group),
        c.size(group),
        theta,
        master_seed,
        "rr",
        &[group as u64],
    )
}

/// Builds a pool with roots uniform over all of V, for influence
/// maximization without groups.
pub fn build_global_pool(g: &Graph, theta: usize, master_seed: u64) -> Result<RRSetPool> {
    let universe: Vec<NodeId> = (0..g.node_count()).collect();
    build_pool(g, &universe, None, g.node_count(), theta, master_seed, "rr-global", &[])
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// The RR-set count prescribed for one group, given a lower bound on the
/// group's optimum: `2n((1-1/e)a + b)^2 / (LB eps^2)` with
/// `a = sqrt(l ln n + ln 4)` and `b = sqrt((1-1/e)(ln C(n,k) + l ln n + ln 4))`,
/// where `n` is the group size. Budgets above the group size are clamped
/// inside the binomial term.
pub fn theta_for_lower_bound(
    group_size: usize,
    k: usize,
    epsilon: f64,
    ell: f64,
    lower_bound: f64,
) -> f64 {
    let n = group_size as f64;
    let k_eff = k.min(group_size);
    let frac = 1.0 - 1.0 / std::f64::consts::E;
    let ln4 = 4.0f64.ln();
    let alpha = (ell * n.ln() + ln4).sqrt();
    let beta = (frac * (ln_binomial(group_size, k_eff) + ell * n.ln() + ln4)).sqrt();
    let numerator = 2.0 * n * (frac * alpha + beta) * (frac * alpha + beta);
    numerator / (lower_bound * epsilon * epsilon)
}

/// Two-phase IMM sample-size estimation for one group: a lower bound on the
/// group optimum is found by iterative halving over candidate thresholds
/// (each tested with its own small pool), then plugged into
/// [`theta_for_lower_bound`]. Returns `theta_override` verbatim when set,
/// and never less than `theta_min` otherwise.
pub fn compute_theta(
    g: &Graph,
    c: &GroupStructure,
    group: usize,
    k: usize,
    params: &ImmParams,
    master_seed: u64,
) -> Result<usize> {
    params.validate()?;
    if k == 0 || k > g.node_count() {
        return Err(Error::param(format!("budget {k} outside 1..={}", g.node_count())));
    }
    if group >= c.group_count() {
        return Err(Error::param(format!("group {group} out of range")));
    }
    if let Some(t) = params.theta_override {
        return Ok(t);
    }

    let size = c.size(group);
    let n = size as f64;
    let mut lower_bound = 1.0f64;
    if size >= 2 {
        let eps_p = (2.0f64).sqrt() * params.epsilon;
        let k_eff = k.min(size);
        let lambda_p = (2.0 + 2.0 * eps_p / 3.0)
            * (ln_binomial(size, k_eff) + params.ell * n.ln() + n.log2().ln())
            * n
            / (eps_p * eps_p);
        let rounds = n.log2().ceil() as usize;
        for i in 1..rounds {
            let x = n / 2f64.powi(i as i32);
            let theta_i = (lambda_p / x).ceil() as usize;
            let pool = build_pool(
                g,
                c.members(group),
                Some(group),
                size,
                theta_i.max(1),
                master_seed,
                "rr-lb",
                &[group as u64, i as u64],
            )?;
            let picks = greedy_max_cover(&pool, k)?;
            let covered: usize = picks.iter().map(|&(_, gain)| gain).sum();
            let fraction = covered as f64 / pool.theta() as f64;
            if n * fraction >= (1.0 + eps_p) * x {
                lower_bound = n * fraction / (1.0 + eps_p);
                break;
            }
        }
    }
    let raw = theta_for_lower_bound(size, k, params.epsilon, params.ell, lower_bound);
    Ok((raw.ceil() as usize).max(params.theta_min))
}

/// Greedy max-coverage over a pool: repeatedly picks the node covering the
/// most still-uncovered sets, ties to the smallest id. Candidates range over
/// all of V. Once every set is covered, remaining picks are the smallest
/// unused ids with zero gain, keeping the output length at exactly `k`.
pub fn greedy_max_cover(pool: &RRSetPool, k: usize) -> Result<Vec<(NodeId, usize)>> {
    let n = pool.node_count();
    if k == 0 || k > n {
        return Err(Error::param(format!("budget {k} outside 1..={n}")));
    }
    let mut covered = vec![false; pool.theta()];
    let mut picked = vec![false; n];
    let mut gain = vec![0usize; n];
    for set in pool.sets() {
        for &v in &set.members {
            gain[v] += 1;
        }
    }
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<NodeId> = None;
        for v in 0..n {
            if !picked[v] && best.is_none_or(|b| gain[v] > gain[b]) {
                best = Some(v);
            }
        }
        let v = best.expect("k <= n leaves an unpicked node");
        picked[v] = true;
        picks.push((v, gain[v]));
        for &si in pool.sets_containing(v) {
            let si = si as usize;
            if !covered[si] {
                covered[si] = true;
                // Every member of a newly covered set loses that set from
                // its marginal gain.
                for &m in &pool.sets()[si].members {
                    gain[m] -= 1;
                }
            }
        }
    }
    Ok(picks)
}

/// Incremental coverage counter for one pool.
#[derive(Debug, Clone)]
pub struct CoverageScorer<'p> {
    pool: &'p RRSetPool,
    covered: Vec<bool>,
    count: usize,
}

impl<'p> CoverageScorer<'p> {
    pub fn new(pool: &'p RRSetPool) -> CoverageScorer<'p> {
        CoverageScorer { pool, covered: vec![false; pool.theta()], count: 0 }
    }

    pub fn add(&mut self, v: NodeId) {
        for &si in self.pool.sets_containing(v) {
            let si = si as usize;
            if !self.covered[si] {
                self.covered[si] = true;
                self.count += 1;
            }
        }
    }

    fn gain(&self, v: NodeId) -> usize {
        self.pool.sets_containing(v).iter().filter(|&&si| !self.covered[si as usize]).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count as f64 / self.pool.theta() as f64
    }

    pub fn fraction_if_added(&self, v: NodeId) -> f64 {
        (self.count + self.gain(v)) as f64 / self.pool.theta() as f64
    }
}

/// Incremental maximin scorer over one pool per group.
#[derive(Debug, Clone)]
pub struct PhiScorer<'p> {
    scorers: Vec<CoverageScorer<'p>>,
}

impl<'p> PhiScorer<'p> {
    pub fn new(pools: &'p [RRSetPool]) -> PhiScorer<'p> {
        PhiScorer { scorers: pools.iter().map(CoverageScorer::new).collect() }
    }

    pub fn add(&mut self, v: NodeId) {
        for s in &mut self.scorers {
            s.add(v);
        }
    }

    pub fn phi(&self) -> f64 {
        self.scorers.iter().map(CoverageScorer::fraction).fold(f64::INFINITY, f64::min)
    }

    /// Current estimated utility of one group under the seeds added so far.
    pub fn group_utility(&self, group: usize) -> f64 {
        self.scorers[group].fraction()
    }

    pub fn phi_if_added(&self, v: NodeId) -> f64 {
        self.scorers.iter().map(|s| s.fraction_if_added(v)).fold(f64::INFINITY, f64::min)
    }
}
