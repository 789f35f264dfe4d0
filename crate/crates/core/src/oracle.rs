//! Brute-force ground truth on tiny graphs: exact spread, group utilities,
//! maximin value, optimal seed sets, and executable monotonicity and
//! submodularity checks, all by enumerating every live-edge graph.
//!
//! Arithmetic is exact. Every f64 probability equals `a / 2^s` for integers
//! `a, s`, so each live-edge graph's probability is an integer over the
//! common denominator `2^Σs`. Numerators are accumulated in u128 when the
//! denominator is small enough and in BigUint otherwise; results are exposed
//! as rationals plus an f64 view.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::diffusion::SeedSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure, NodeId};
use crate::rng::substream;

/// Live-edge enumeration refuses graphs with more edges than this.
pub const DEFAULT_EDGE_CAP: usize = 16;
/// `optimum` refuses budgets whose subset count exceeds this.
pub const DEFAULT_SUBSET_CAP: u64 = 50_000;
/// Exhaustive property checks refuse graphs with more nodes than this.
const EXHAUSTIVE_NODE_CAP: usize = 10;

/// An exactly computed quantity with its f64 view and the number of
/// live-edge graphs enumerated to obtain it.
#[derive(Debug, Clone)]
pub struct ExactValue {
    pub value: f64,
    pub exact: BigRational,
    pub enumeration_size: usize,
}

impl ExactValue {
    fn new(exact: BigRational, enumeration_size: usize) -> ExactValue {
        let value = exact.to_f64().expect("rational fits f64 range");
        ExactValue { value, exact, enumeration_size }
    }
}

/// The exact maximin optimum over all size-k seed sets.
#[derive(Debug, Clone)]
pub struct OptimalResult {
    pub best_set: SeedSet,
    pub best_phi: ExactValue,
    pub evaluated_subsets: usize,
}

/// Outcome of a property check: comparisons made, violations found, and the
/// smallest margin seen (negative iff a violation occurred).
#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub checked: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

/// How check_submodularity picks its `(S ⊆ T, v ∉ T)` triples.
#[derive(Debug, Clone, Copy)]
pub enum CheckMode {
    Exhaustive,
    Sampled { triples: usize, seed: u64 },
}

enum Weights {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

/// Precomputed enumeration of all live-edge graphs of one graph: per-mask
/// probabilities (as numerators over `2^total_shift`) and per-mask per-node
/// reachability bitsets.
pub struct ExactOracle<'g> {
    g: &'g Graph,
    weights: Weights,
    total_shift: u64,
    /// reach[mask][v] = bitset of nodes reachable from v under that mask.
    reach: Vec<Vec<u64>>,
}

/// Decomposes a probability into `(a, s)` with `p = a / 2^s` exactly.
/// Any finite f64 admits such a form with `a < 2^53`.
fn dyadic(p: f64) -> (u64, u32) {
    let mut x = p;
    let mut s = 0u32;
    while x != x.trunc() {
        x *= 2.0;
        s += 1;
    }
    (x as u64, s)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl<'g> ExactOracle<'g> {
    pub fn new(g: &'g Graph) -> Result<ExactOracle<'g>> {
        ExactOracle::with_edge_cap(g, DEFAULT_EDGE_CAP)
    }

    pub fn with_edge_cap(g: &'g Graph, edge_cap: usize) -> Result<ExactOracle<'g>> {
        let (n, e) = (g.node_count(), g.edge_count());
        if e > edge_cap {
            return Err(Error::cap(format!(
                "{e} edges exceed the enumeration cap of {edge_cap}; use the Monte Carlo \
                 estimators instead"
            )));
        }
        if n > 64 {
            return Err(Error::cap(format!("{n} nodes exceed the 64-node enumeration limit")));
        }
        if !g.probabilities_assigned() {
            return Err(Error::param("assign edge probabilities before exact evaluation"));
        }

        let parts: Vec<(u64, u32)> = (0..e).map(|eid| dyadic(g.prob(eid))).collect();
        let total_shift: u64 = parts.iter().map(|&(_, s)| s as u64).sum();
        let masks = 1usize << e;

        // Factor tables: factor[eid][kept as usize].
        let weights = if total_shift <= 120 {
            let factors: Vec<[u128; 2]> =
                parts.iter().map(|&(a, s)| [(1u128 << s) - a as u128, a as u128]).collect();
            let w = (0..masks)
                .map(|mask| {
                    factors.iter().enumerate().map(|(eid, f)| f[(mask >> eid) & 1]).product()
                })
                .collect();
            Weights::Small(w)
        } else {
            let factors: Vec<[BigUint; 2]> = parts
                .iter()
                .map(|&(a, s)| [(BigUint::one() << s) - BigUint::from(a), BigUint::from(a)])
                .collect();
            let w = (0..masks)
                .map(|mask| {
                    factors
                        .iter()
                        .enumerate()
                        .fold(BigUint::one(), |acc, (eid, f)| acc * &f[(mask >> eid) & 1])
                })
                .collect();
            Weights::Big(w)
        };

        let mut reach = Vec::with_capacity(masks);
        let mut next = vec![0u64; n];
        for mask in 0..masks {
            for x in next.iter_mut() {
                *x = 0;
            }
            for (eid, edge) in g.edges().iter().enumerate() {
                if (mask >> eid) & 1 == 1 {
                    next[edge.source] |= 1u64 << edge.target;
                }
            }
            let mut per_node = vec![0u64; n];
            for (v, slot) in per_node.iter_mut().enumerate() {
                let mut visited = 1u64 << v;
                let mut frontier = visited;
                while frontier != 0 {
                    let mut grown = 0u64;
                    let mut f = frontier;
                    while f != 0 {
                        let u = f.trailing_zeros() as usize;
                        f &= f - 1;
                        grown |= next[u];
                    }
                    frontier = grown & !visited;
                    visited |= frontier;
                }
                *slot = visited;
            }
            reach.push(per_node);
        }

        Ok(ExactOracle { g, weights, total_shift, reach })
    }

    pub fn enumeration_size(&self) -> usize {
        self.reach.len()
    }

    fn denominator(&self) -> BigInt {
        BigInt::one() << (self.total_shift as usize)
    }

    fn union_reach(&self, mask: usize, seeds: &[NodeId]) -> u64 {
        seeds.iter().fold(0u64, |acc, &s| acc | self.reach[mask][s])
    }

    /// Probability mass of each reachable-count value within `restrict`,
    /// as numerators over the common denominator.
    fn count_distribution(&self, seeds: &[NodeId], restrict: u64) -> Vec<BigUint> {
        let n = self.g.node_count();
        match &self.weights {
            Weights::Small(w) => {
                let mut buckets = vec![0u128; n + 1];
                for (mask, &wt) in w.iter().enumerate() {
                    let covered = self.union_reach(mask, seeds) & restrict;
                    buckets[covered.count_ones() as usize] += wt;
                }
                buckets.into_iter().map(BigUint::from).collect()
            }
            Weights::Big(w) => {
                let mut buckets = vec![BigUint::zero(); n + 1];
                for (mask, wt) in w.iter().enumerate() {
                    let covered = self.union_reach(mask, seeds) & restrict;
                    buckets[covered.count_ones() as usize] += wt;
                }
                buckets
            }
        }
    }

    /// Numerator of σ restricted to `restrict`, over the common denominator.
    fn sigma_numerator(&self, seeds: &[NodeId], restrict: u64) -> BigUint {
        self.count_distribution(seeds, restrict)
            .into_iter()
            .enumerate()
            .fold(BigUint::zero(), |acc, (count, mass)| acc + mass * BigUint::from(count))
    }

    fn value_over(&self, numerator: BigUint, extra_denom: usize) -> ExactValue {
        let den = self.denominator() * BigInt::from(extra_denom);
        ExactValue::new(BigRational::new(BigInt::from(numerator), den), self.enumeration_size())
    }

    /// Exact influence spread of `seeds` over the whole node set.
    pub fn sigma(&self, seeds: &[NodeId]) -> ExactValue {
        let restrict = full_mask(self.g.node_count());
        self.value_over(self.sigma_numerator(seeds, restrict), 1)
    }

    /// Exact spread counted within group `group` only.
    pub fn sigma_group(&self, c: &GroupStructure, group: usize, seeds: &[NodeId]) -> ExactValue {
        self.value_over(self.sigma_numerator(seeds, self.group_mask(c, group)), 1)
    }

    /// Exact utility `u_c = σ_c / |V_c|`.
    pub fn utility(&self, c: &GroupStructure, group: usize, seeds: &[NodeId]) -> ExactValue {
        let num = self.sigma_numerator(seeds, self.group_mask(c, group));
        self.value_over(num, c.size(group))
    }

    /// Exact maximin value: the smallest group utility.
    pub fn phi(&self, c: &GroupStructure, seeds: &[NodeId]) -> ExactValue {
        let best = (0..c.group_count())
            .map(|gi| self.utility(c, gi, seeds).exact)
            .min()
            .expect("at least one group");
        ExactValue::new(best, self.enumeration_size())
    }

    fn group_mask(&self, c: &GroupStructure, group: usize) -> u64 {
        c.members(group).iter().fold(0u64, |acc, &v| acc | (1u64 << v))
    }

    /// Exact distribution of the activated-node count: entry i is
    /// `P(|activated| = i)`.
    pub fn size_distribution(&self, seeds: &[NodeId]) -> Vec<f64> {
        let restrict = full_mask(self.g.node_count());
        let den = self.denominator();
        self.count_distribution(seeds, restrict)
            .into_iter()
            .map(|mass| {
                BigRational::new(BigInt::from(mass), den.clone())
                    .to_f64()
                    .expect("probability fits f64")
            })
            .collect()
    }

    /// Exhaustive maximin optimum over all size-k subsets, ties broken by
    /// the lexicographically smallest node list.
    pub fn optimum(&self, c: &GroupStructure, k: usize) -> Result<OptimalResult> {
        self.optimum_capped(c, k, DEFAULT_SUBSET_CAP)
    }

    pub fn optimum_capped(
        &self,
        c: &GroupStructure,
        k: usize,
        subset_cap: u64,
    ) -> Result<OptimalResult> {
        let n = self.g.node_count();
        if k == 0 || k > n {
            return Err(Error::param(format!("budget {k} outside 1..={n}")));
        }
        match binomial_at_most(n as u64, k as u64, subset_cap) {
            Some(_) => {}
            None => {
                return Err(Error::cap(format!(
                    "C({n}, {k}) exceeds the subset cap of {subset_cap}"
                )))
            }
        }
        let mut best_phi: Option<BigRational> = None;
        let mut best: Vec<NodeId> = Vec::new();
        let mut evaluated = 0usize;
        for_each_combination(n, k, |combo| {
            evaluated += 1;
            let phi = self.phi(c, combo).exact;
            if best_phi.as_ref().is_none_or(|cur| phi > *cur) {
                best_phi = Some(phi);
                best = combo.to_vec();
            }
        });
        Ok(OptimalResult {
            best_set: SeedSet::from_nodes(best, k)?,
            best_phi: ExactValue::new(best_phi.expect("k >= 1"), self.enumeration_size()),
            evaluated_subsets: evaluated,
        })
    }

    /// Exhaustive maximum of σ restricted to one group, over size-k subsets.
    /// This is the per-group optimum OPT_c the selection guarantee refers to.
    pub fn optimum_group_sigma(
        &self,
        c: &GroupStructure,
        group: usize,
        k: usize,
    ) -> Result<OptimalResult> {
        let n = self.g.node_count();
        if k == 0 || k > n {
            return Err(Error::param(format!("budget {k} outside 1..={n}")));
        }
        if binomial_at_most(n as u64, k as u64, DEFAULT_SUBSET_CAP).is_none() {
            return Err(Error::cap(format!(
                "C({n}, {k}) exceeds the subset cap of {DEFAULT_SUBSET_CAP}"
            )));
        }
        let restrict = self.group_mask(c, group);
        let den = self.denominator();
        let mut best_num: Option<BigUint> = None;
        let mut best: Vec<NodeId> = Vec::new();
        let mut evaluated = 0usize;
        for_each_combination(n, k, |combo| {
            evaluated += 1;
            let num = self.sigma_numerator(combo, restrict);
            if best_num.as_ref().is_none_or(|cur| num > *cur) {
                best_num = Some(num);
                best = combo.to_vec();
            }
        });
        let num = best_num.expect("k >= 1");
        Ok(OptimalResult {
            best_set: SeedSet::from_nodes(best, k)?,
            best_phi: ExactValue::new(
                BigRational::new(BigInt::from(num), den),
                self.enumeration_size(),
            ),
            evaluated_subsets: evaluated,
        })
    }

    /// Per-group σ numerators for every subset of V, indexed by node bitmask.
    /// Usable only under the exhaustive node cap.
    fn subset_table(&self, c: &GroupStructure) -> Result<Vec<Vec<BigUint>>> {
        let n = self.g.node_count();
        if n > EXHAUSTIVE_NODE_CAP {
            return Err(Error::cap(format!(
                "{n} nodes exceed the exhaustive property-check cap of {EXHAUSTIVE_NODE_CAP}"
            )));
        }
        let group_masks: Vec<u64> = (0..c.group_count()).map(|gi| self.group_mask(c, gi)).collect();
        let mut table = Vec::with_capacity(1usize << n);
        let mut nodes = Vec::with_capacity(n);
        for subset in 0u64..(1u64 << n) {
            nodes.clear();
            let mut s = subset;
            while s != 0 {
                nodes.push(s.trailing_zeros() as usize);
                s &= s - 1;
            }
            table.push(
                group_masks.iter().map(|&gm| self.sigma_numerator(&nodes, gm)).collect::<Vec<_>>(),
            );
        }
        Ok(table)
    }
}

/// Lexicographic enumeration of all k-subsets of `0..n`.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        // Advance to the next combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// C(n, k) if it does not exceed `cap`, else None.
fn binomial_at_most(n: u64, k: u64, cap: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Exact influence spread of a seed list.
pub fn exact_sigma(g: &Graph, seeds: &[NodeId]) -> Result<ExactValue> {
    Ok(ExactOracle::new(g)?.sigma(seeds))
}

/// Exact spread within one group.
pub fn exact_sigma_group(
    g: &Graph,
    c: &GroupStructure,
    group: usize,
    seeds: &[NodeId],
) -> Result<ExactValue> {
    Ok(ExactOracle::new(g)?.sigma_group(c, group, seeds))
}

/// Exact maximin value of a seed list.
pub fn exact_phi(g: &Graph, c: &GroupStructure, seeds: &[NodeId]) -> Result<ExactValue> {
    Ok(ExactOracle::new(g)?.phi(c, seeds))
}

/// Exact maximin optimum over all size-k seed sets.
pub fn exact_optimum(g: &Graph, c: &GroupStructure, k: usize) -> Result<OptimalResult> {
    ExactOracle::new(g)?.optimum(c, k)
}

/// Checks the diminishing-returns inequality
/// `σ_c(S ∪ {v}) - σ_c(S) >= σ_c(T ∪ {v}) - σ_c(T)` for triples
/// `S ⊆ T ⊆ V \ {v}`, on every group, with exact arithmetic.
pub fn check_submodularity(
    g: &Graph,
    c: &GroupStructure,
    mode: CheckMode,
) -> Result<PropertyReport> {
    let oracle = ExactOracle::new(g)?;
    let n = g.node_count();
    let den = oracle.denominator();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut worst: Option<BigInt> = None;

    let mut record = |lhs: BigUint, rhs: BigUint| {
        checked += 1;
        let margin = BigInt::from(lhs) - BigInt::from(rhs);
        if margin < BigInt::zero() {
            violations += 1;
        }
        if worst.as_ref().is_none_or(|w| margin < *w) {
            worst = Some(margin);
        }
    };

    match mode {
        CheckMode::Exhaustive => {
            let table = oracle.subset_table(c)?;
            for t_mask in 0u64..(1u64 << n) {
                for v in 0..n {
                    if (t_mask >> v) & 1 == 1 {
                        continue;
                    }
                    let vbit = 1u64 << v;
                    // Subsets of t_mask, including t_mask itself and 0.
                    let mut s_mask = t_mask;
                    loop {
                        for gi in 0..c.group_count() {
                            let lhs =
                                &table[(s_mask | vbit) as usize][gi] + &table[t_mask as usize][gi];
                            let rhs =
                                &table[s_mask as usize][gi] + &table[(t_mask | vbit) as usize][gi];
                            record(lhs, rhs);
                        }
                        if s_mask == 0 {
                            break;
                        }
                        s_mask = (s_mask - 1) & t_mask;
                    }
                }
            }
        }
        CheckMode::Sampled { triples, seed } => {
            let group_masks: Vec<u64> =
                (0..c.group_count()).map(|gi| oracle.group_mask(c, gi)).collect();
            for i in 0..triples {
                let mut rng = substream(seed, "submod", &[i as u64]);
                let v = rng.random_range(0..n);
                let mut s_nodes = Vec::new();
                let mut t_nodes = Vec::new();
                for u in 0..n {
                    if u == v {
                        continue;
                    }
                    match rng.random_range(0..3u8) {
                        0 => {}
                        1 => t_nodes.push(u),
                        _ => {
                            s_nodes.push(u);
                            t_nodes.push(u);
                        }
                    }
                }
                let mut sv = s_nodes.clone();
                sv.push(v);
                let mut tv = t_nodes.clone();
                tv.push(v);
                for &gm in &group_masks {
                    let lhs =
                        oracle.sigma_numerator(&sv, gm) + oracle.sigma_numerator(&t_nodes, gm);
                    let rhs =
                        oracle.sigma_numerator(&s_nodes, gm) + oracle.sigma_numerator(&tv, gm);
                    record(lhs, rhs);
                }
            }
        }
    }

    let worst_margin = match worst {
        None => 0.0,
        Some(w) => BigRational::new(w, den).to_f64().expect("margin fits f64"),
    };
    Ok(PropertyReport { checked, violations, worst_margin })
}

/// Checks `σ_c(S ∪ {v}) >= σ_c(S)` exhaustively for every subset S, node
/// `v ∉ S`, and group, with exact arithmetic.
pub fn check_monotonicity(g: &Graph, c: &GroupStructure) -> Result<PropertyReport> {
    let oracle = ExactOracle::new(g)?;
    let n = g.node_count();
    let table = oracle.subset_table(c)?;
    let den = oracle.denominator();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut worst: Option<BigInt> = None;
    for s_mask in 0u64..(1u64 << n) {
        for v in 0..n {
            if (s_mask >> v) & 1 == 1 {
                continue;
            }
            let with_v = (s_mask | (1u64 << v)) as usize;
            for gi in 0..c.group_count() {
                checked += 1;
                let margin = BigInt::from(table[with_v][gi].clone())
                    - BigInt::from(table[s_mask as usize][gi].clone());
                if margin < BigInt::zero() {
                    violations += 1;
                }
                if worst.as_ref().is_none_or(|w| margin < *w) {
                    worst = Some(margin);
                }
            }
        }
    }
    let worst_margin = match worst {
        None => 0.0,
        Some(w) => BigRational::new(w, den).to_f64().expect("margin fits f64"),
    };
    Ok(PropertyReport { checked, violations, worst_margin })
}
