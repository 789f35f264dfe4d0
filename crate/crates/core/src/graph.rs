//! Directed graphs with per-edge activation probabilities and a
//! non-overlapping partition of the nodes into groups.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense node index in `[0, node_count)`.
pub type NodeId = usize;

/// Index into a graph's edge list.
pub type EdgeId = usize;

/// A directed edge. `prob` stays `None` until a probability is parsed from
/// the input or filled in by [`Graph::assign_wc_probabilities`].
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub prob: Option<f64>,
}

/// A directed graph with forward and reverse adjacency.
///
/// Nodes are dense indices; the original textual ids from the input file are
/// retained as labels. Construction drops self-loops and collapses duplicate
/// `(source, target)` pairs, keeping the first probability seen.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    forward: Vec<Vec<EdgeId>>,
    reverse: Vec<Vec<EdgeId>>,
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    self_loops_dropped: usize,
    duplicates_collapsed: usize,
}

impl Graph {
    /// Builds a graph from explicit edges over `node_count` nodes.
    /// Labels default to the decimal form of each index.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, Option<f64>)>,
    ) -> Result<Graph> {
        let labels: Vec<String> = (0..node_count).map(|i| i.to_string()).collect();
        Self::build(labels, edges.into_iter().collect())
    }

    /// Convenience for tests and generators: every edge has an explicit probability.
    pub fn from_weighted_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Graph> {
        Self::from_edges(node_count, edges.into_iter().map(|(u, v, p)| (u, v, Some(p))))
    }

    /// Parses a whitespace-separated edge list: `u v` or `u v p` per line,
    /// `#` comments and blank lines ignored. Node ids may be arbitrary
    /// tokens; they are remapped to dense indices in first-appearance order.
    /// With `directed` off, each input line yields both directions.
    pub fn from_edge_list(reader: impl BufRead, directed: bool) -> Result<Graph> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut intern = |tok: &str, labels: &mut Vec<String>| -> NodeId {
            if let Some(&id) = index.get(tok) {
                return id;
            }
            let id = labels.len();
            labels.push(tok.to_string());
            index.insert(tok.to_string(), id);
            id
        };

        let mut raw: Vec<(NodeId, NodeId, Option<f64>)> = Vec::new();
        for (ln, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |message: &str| Error::Parse { line: ln + 1, message: message.to_string() };
            let mut fields = line.split_whitespace();
            let u = fields.next().expect("non-empty line has a first field");
            let v = fields.next().ok_or_else(|| parse("expected `u v` or `u v p`"))?;
            let prob = match fields.next() {
                None => None,
                Some(tok) => {
                    let p: f64 =
                        tok.parse().map_err(|_| parse(&format!("bad probability `{tok}`")))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(parse(&format!("probability {p} outside [0, 1]")));
                    }
                    Some(p)
                }
            };
            if fields.next().is_some() {
                return Err(parse("too many fields"));
            }
            let (u, v) = (intern(u, &mut labels), intern(v, &mut labels));
            raw.push((u, v, prob));
            if !directed {
                raw.push((v, u, prob));
            }
        }
        if raw.is_empty() {
            return Err(Error::data("edge list is empty"));
        }
        Self::build(labels, raw)
    }

    fn build(labels: Vec<String>, raw: Vec<(NodeId, NodeId, Option<f64>)>) -> Result<Graph> {
        let node_count = labels.len();
        if node_count == 0 {
            return Err(Error::data("graph has no nodes"));
        }
        let mut seen: HashMap<(NodeId, NodeId), ()> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::with_capacity(raw.len());
        let mut self_loops_dropped = 0usize;
        let mut duplicates_collapsed = 0usize;
        for (source, target, prob) in raw {
            if source >= node_count || target >= node_count {
                return Err(Error::data(format!(
                    "edge ({source}, {target}) references a node outside 0..{node_count}"
                )));
            }
            if let Some(p) = prob {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::data(format!("probability {p} outside [0, 1]")));
                }
            }
            if source == target {
                self_loops_dropped += 1;
                continue;
            }
            if seen.insert((source, target), ()).is_some() {
                duplicates_collapsed += 1;
                continue;
            }
            edges.push(Edge { source, target, prob });
        }
        let mut forward = vec![Vec::new(); node_count];
        let mut reverse = vec![Vec::new(); node_count];
        for (eid, e) in edges.iter().enumerate() {
            forward[e.source].push(eid);
            reverse[e.target].push(eid);
        }
        let label_index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(Graph {
            node_count,
            edges,
            forward,
            reverse,
            labels,
            label_index,
            self_loops_dropped,
            duplicates_collapsed,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, eid: EdgeId) -> &Edge {
        &self.edges[eid]
    }

    /// Outgoing edge ids of `v`.
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.forward[v]
    }

    /// Incoming edge ids of `v`.
    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.reverse[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.reverse[v].len()
    }

    /// The activation probability of `eid`. Panics if it is still unset;
    /// sampling code must run after probability assignment.
    pub fn prob(&self, eid: EdgeId) -> f64 {
        self.edges[eid].prob.expect("edge probability unset; assign probabilities before sampling")
    }

    pub fn probabilities_assigned(&self) -> bool {
        self.edges.iter().all(|e| e.prob.is_some())
    }

    /// Weighted-cascade assignment: each edge `(u, v)` still lacking an
    /// explicit probability gets `1 / in_degree(v)`. An edge's own presence
    /// makes `in_degree(v) >= 1`, so the quotient is always defined.
    pub fn assign_wc_probabilities(&mut self) {
        let degrees: Vec<usize> = (0..self.node_count).map(|v| self.reverse[v].len()).collect();
        for e in &mut self.edges {
            if e.prob.is_none() {
                e.prob = Some(1.0 / degrees[e.target] as f64);
            }
        }
    }

    /// Overwrites every edge probability with `p`.
    pub fn set_all_probabilities(&mut self, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("probability {p} outside [0, 1]")));
        }
        for e in &mut self.edges {
            e.prob = Some(p);
        }
        Ok(())
    }

    /// The original input id of `v`.
    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.label_index.get(label).copied()
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn duplicates_collapsed(&self) -> usize {
        self.duplicates_collapsed
    }
}

/// A partition of the nodes into `m >= 1` non-empty groups.
#[derive(Debug, Clone)]
pub struct GroupStructure {
    membership: Vec<usize>,
    members: Vec<Vec<NodeId>>,
    labels: Vec<String>,
}

impl GroupStructure {
    /// Builds the partition from a per-node group index. Group indices must
    /// be dense in `[0, m)` with every group non-empty.
    pub fn from_membership(membership: Vec<usize>) -> Result<GroupStructure> {
        if membership.is_empty() {
            return Err(Error::data("group membership is empty"));
        }
        let m = membership.iter().copied().max().expect("non-empty") + 1;
        let mut members = vec![Vec::new(); m];
        for (v, &c) in membership.iter().enumerate() {
            members[c].push(v);
        }
        if let Some(c) = members.iter().position(|g| g.is_empty()) {
            return Err(Error::data(format!("group {c} has no members")));
        }
        let labels = (0..m).map(|c| c.to_string()).collect();
        Ok(GroupStructure { membership, members, labels })
    }

    /// Puts every node of an `n`-node graph into one group.
    pub fn single(node_count: usize) -> GroupStructure {
        GroupStructure::from_membership(vec![0; node_count]).expect("one non-empty group")
    }

    /// Parses `node_id group_label` lines. Every node of `g` must appear
    /// exactly once; labels are remapped to dense group indices in
    /// first-appearance order.
    pub fn from_reader(reader: impl BufRead, g: &Graph) -> Result<GroupStructure> {
        let mut labels: Vec<String> = Vec::new();
        let mut label_index: HashMap<String, usize> = HashMap::new();
        let mut membership: Vec<Option<usize>> = vec![None; g.node_count()];
        for (ln, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |message: String| Error::Parse { line: ln + 1, message };
            let mut fields = line.split_whitespace();
            let node_tok = fields.next().expect("non-empty line has a first field");
            let group_tok =
                fields.next().ok_or_else(|| parse("expected `node group`".to_string()))?;
            if fields.next().is_some() {
                return Err(parse("too many fields".to_string()));
            }
            let v = g
                .node_by_label(node_tok)
                .ok_or_else(|| parse(format!("unknown node id `{node_tok}`")))?;
            let c = *label_index.entry(group_tok.to_string()).or_insert_with(|| {
                labels.push(group_tok.to_string());
                labels.len() - 1
            });
            match membership[v] {
                None => membership[v] = Some(c),
                Some(prev) if prev == c => {}
                Some(prev) => {
                    return Err(Error::data(format!(
                        "node `{node_tok}` labeled both `{}` and `{group_tok}`",
                        labels[prev]
                    )))
                }
            }
        }
        let mut resolved = Vec::with_capacity(g.node_count());
        for (v, m) in membership.into_iter().enumerate() {
            match m {
                Some(c) => resolved.push(c),
                None => {
                    return Err(Error::data(format!("node `{}` has no group label", g.label(v))))
                }
            }
        }
        let mut members = vec![Vec::new(); labels.len()];
        for (v, &c) in resolved.iter().enumerate() {
            members[c].push(v);
        }
        // Non-empty groups hold by construction: a label exists only because
        // some node introduced it.
        Ok(GroupStructure { membership: resolved, members, labels })
    }

    pub fn group_count(&self) -> usize {
        self.members.len()
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn group_of(&self, v: NodeId) -> usize {
        self.membership[v]
    }

    pub fn members(&self, c: usize) -> &[NodeId] {
        &self.members[c]
    }

    pub fn size(&self, c: usize) -> usize {
        self.members[c].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(|g| g.len()).collect()
    }

    pub fn label(&self, c: usize) -> &str {
        &self.labels[c]
    }
}

/// Structural statistics of a grouped graph.
#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    /// Fraction of edges whose endpoints lie in different groups.
    pub rho: f64,
    pub group_sizes: Vec<usize>,
    pub edge_count: usize,
    pub inner_edge_count: usize,
    pub cross_edge_count: usize,
}

/// Computes `rho`, the cross-group fraction of the directed edge list.
/// `rho = 0` exactly when no edge joins two groups.
pub fn group_connectivity(g: &Graph, c: &GroupStructure) -> Result<GraphStats> {
    if c.node_count() != g.node_count() {
        return Err(Error::data(format!(
            "group structure covers {} nodes but the graph has {}",
            c.node_count(),
            g.node_count()
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::data("connectivity is undefined on a graph with no edges"));
    }
    let cross_edge_count =
        g.edges().iter().filter(|e| c.group_of(e.source) != c.group_of(e.target)).count();
    let edge_count = g.edge_count();
    Ok(GraphStats {
        rho: cross_edge_count as f64 / edge_count as f64,
        group_sizes: c.sizes(),
        edge_count,
        inner_edge_count: edge_count - cross_edge_count,
        cross_edge_count,
    })
}
