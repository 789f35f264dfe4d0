//! Inner-group maximization: per-group IMM runs producing the m-by-k seed
//! matrix, with the per-group RR-set pools retained for the across-group
//! coordination step.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure, NodeId};
use crate::ris::{build_group_pool, compute_theta, greedy_max_cover, ImmParams, RRSetPool};

/// The per-group ranked seed lists. Row c holds group c's budget-k seeds in
/// greedy order; a node may appear in several rows but never twice in one.
#[derive(Debug, Clone)]
pub struct SeedMatrix {
    k: usize,
    rows: Vec<Vec<NodeId>>,
    gains: Vec<Vec<usize>>,
}

impl SeedMatrix {
    pub fn new(k: usize, rows: Vec<Vec<NodeId>>, gains: Vec<Vec<usize>>) -> Result<SeedMatrix> {
        if rows.is_empty() {
            return Err(Error::param("seed matrix needs at least one row"));
        }
        if rows.len() != gains.len() {
            return Err(Error::param("rows and gains differ in length"));
        }
        for (c, row) in rows.iter().enumerate() {
            if row.len() != k || gains[c].len() != k {
                return Err(Error::param(format!("row {c} is not length {k}")));
            }
            let mut sorted = row.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != k {
                return Err(Error::param(format!("row {c} repeats a node")));
            }
        }
        Ok(SeedMatrix { k, rows, gains })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, c: usize) -> &[NodeId] {
        &self.rows[c]
    }

    pub fn gains(&self, c: usize) -> &[usize] {
        &self.gains[c]
    }

    /// Count of distinct nodes across all rows.
    pub fn distinct_nodes(&self) -> usize {
        let mut all: Vec<NodeId> = self.rows.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

/// Step-1 output: the matrix plus the pools and sample sizes that built it.
pub struct IgmOutput {
    pub matrix: SeedMatrix,
    pub pools: Vec<RRSetPool>,
    pub params: ImmParams,
    pub thetas: Vec<usize>,
}

/// JSON-facing view of a seed matrix, in original node ids.
#[derive(Debug, Clone, Serialize)]
pub struct SeedMatrixReport {
    pub k: usize,
    pub groups: Vec<SeedRowReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRowReport {
    pub group: String,
    pub theta: usize,
    pub seeds: Vec<String>,
    pub gains: Vec<usize>,
}

impl IgmOutput {
    pub fn report(&self, g: &Graph, c: &GroupStructure) -> SeedMatrixReport {
        let groups = (0..self.matrix.m())
            .map(|gi| SeedRowReport {
                group: c.label(gi).to_string(),
                theta: self.thetas[gi],
                seeds: self.matrix.row(gi).iter().map(|&v| g.label(v).to_string()).collect(),
                gains: self.matrix.gains(gi).to_vec(),
            })
            .collect();
        SeedMatrixReport { k: self.matrix.k(), groups }
    }
}

/// Runs IMM within every group: sample-size estimation, pool construction,
/// and greedy max-coverage with budget `k`. Groups are processed in
/// parallel; all randomness is keyed by `(master_seed, group)`, so the
/// output is identical at any worker count. Candidate seeds for each row
/// range over all of V, not just the group.
pub fn run_igm(
    g: &Graph,
    c: &GroupStructure,
    k: usize,
    params: &ImmParams,
    master_seed: u64,
) -> Result<IgmOutput> {
    params.validate()?;
    if k == 0 || k > g.node_count() {
        return Err(Error::param(format!("budget {k} outside 1..={}", g.node_count())));
    }
    let per_group: Vec<(usize, RRSetPool, Vec<(NodeId, usize)>)> = (0..c.group_count())
        .into_par_iter()
        .map(|gi| {
            let theta = compute_theta(g, c, gi, k, params, master_seed)?;
            let pool = build_group_pool(g, c, gi, theta, master_seed)?;
            let picks = greedy_max_cover(&pool, k)?;
            Ok((theta, pool, picks))
        })
        .collect::<Result<_>>()?;

    let mut thetas = Vec::with_capacity(per_group.len());
    let mut pools = Vec::with_capacity(per_group.len());
    let mut rows = Vec::with_capacity(per_group.len());
    let mut gains = Vec::with_capacity(per_group.len());
    for (theta, pool, picks) in per_group {
        thetas.push(theta);
        pools.push(pool);
        rows.push(picks.iter().map(|&(v, _)| v).collect());
        gains.push(picks.iter().map(|&(_, gain)| gain).collect());
    }
    Ok(IgmOutput { matrix: SeedMatrix::new(k, rows, gains)?, pools, params: *params, thetas })
}
