//! Planted-partition graph generator for synthetic experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure};
use crate::rng::substream;

/// Parameters of a planted-partition (stochastic block) digraph.
///
/// Every ordered pair of distinct nodes becomes an edge independently: with
/// probability `p_in` when both endpoints share a group, `p_out` otherwise.
/// `p_out = 0` therefore yields fully disconnected groups (`rho = 0`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub group_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return Err(Error::param("group_sizes must be non-empty positive counts"));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Samples a graph and its group partition from `spec`. Nodes are laid out
/// group by group, so group `c` occupies a contiguous index block. Edge
/// activation probabilities are left unset; callers choose an assignment.
pub fn generate(spec: &SynthSpec) -> Result<(Graph, GroupStructure)> {
    spec.validate()?;
    let n: usize = spec.group_sizes.iter().sum();
    let mut membership = Vec::with_capacity(n);
    for (c, &size) in spec.group_sizes.iter().enumerate() {
        membership.extend(std::iter::repeat_n(c, size));
    }
    let mut rng = substream(spec.seed, "synth", &[]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if membership[u] == membership[v] { spec.p_in } else { spec.p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v, None));
            }
        }
    }
    let g = Graph::from_edges(n, edges)?;
    let c = GroupStructure::from_membership(membership)?;
    Ok((g, c))
}
