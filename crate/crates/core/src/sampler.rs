//! Degree-thresholded breadth-first sampling of a local subgraph around a
//! seed.
//!
//! BFS expands layer by layer over edges with weight ≥ `m`.  Frontier nodes
//! whose full-graph degree exceeds `d_max` are never admitted (the seed is
//! exempt; the pipeline pre-filters seeds).  Within a layer candidates are
//! admitted in ascending node id, so a mid-layer cap keeps the smallest ids;
//! this makes sampling deterministic.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::EngagementGraph;
use crate::NodeId;

/// Local subgraph around a seed, over dense indices `0..n` with the seed at
/// index 0.  Dense indices follow BFS admission order.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub seed: NodeId,
    /// Dense index → original node id; index 0 is the seed.
    pub node_ids: Vec<NodeId>,
    /// Original node id → dense index.
    pub index_of: HashMap<NodeId, u32>,
    /// Symmetric weighted adjacency over dense indices, each list sorted.
    pub adjacency: Vec<Vec<(u32, f64)>>,
    /// Full-graph (unweighted) degree of each retained node.
    pub parent_degree: Vec<usize>,
}

impl Subgraph {
    /// Number of sampled nodes.
    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    /// Retained edge count.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Weighted degree of every node (sum of incident weights; no self-loop
    /// contribution).
    pub fn weighted_degrees(&self) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|list| list.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    /// Total weighted volume (sum of weighted degrees).
    pub fn total_volume(&self) -> f64 {
        self.weighted_degrees().iter().sum()
    }

    /// Weight between dense indices `i` and `j`, or `None`.
    pub fn weight(&self, i: u32, j: u32) -> Option<f64> {
        let list = &self.adjacency[i as usize];
        list.binary_search_by(|probe| probe.0.cmp(&j))
            .ok()
            .map(|k| list[k].1)
    }

    /// Copy with every edge weight set to 1.
    pub fn binarized(&self) -> Subgraph {
        let mut out = self.clone();
        for list in &mut out.adjacency {
            for entry in list.iter_mut() {
                entry.1 = 1.0;
            }
        }
        out
    }

    /// Debug dump in the graph TSV edge-list format (original node ids).
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list {
                let (a, b) = (self.node_ids[i], self.node_ids[j as usize]);
                if a < b {
                    rows.push((a, b, w));
                }
            }
        }
        rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut out = String::new();
        for (a, b, w) in rows {
            out.push_str(&format!("{a}\t{b}\t{w}\n"));
        }
        out
    }

    /// Debug dump of the dense-index bijection: `dense_index<TAB>node_id`.
    pub fn node_map_tsv(&self) -> String {
        let mut out = String::new();
        for (i, id) in self.node_ids.iter().enumerate() {
            out.push_str(&format!("{i}\t{id}\n"));
        }
        out
    }
}

/// BFS-sample a local subgraph around `seed`.
///
/// Only edges with weight ≥ `m` are traversed and retained; non-seed nodes
/// with full-graph degree > `d_max` are excluded; expansion stops when
/// `cap_n` nodes are admitted or the frontier is exhausted.  All edges with
/// weight ≥ `m` between admitted nodes are retained (induced completeness).
pub fn sample_subgraph(
    g: &EngagementGraph,
    seed: NodeId,
    d_max: usize,
    cap_n: usize,
    m: f64,
) -> Result<Subgraph> {
    if !g.contains(seed) {
        return Err(Error::SeedMissing(seed));
    }
    if d_max == 0 || cap_n == 0 {
        return Err(Error::Config("d_max and cap_n must be at least 1".into()));
    }

    let mut node_ids: Vec<NodeId> = vec![seed];
    let mut index_of: HashMap<NodeId, u32> = HashMap::from([(seed, 0)]);
    let mut layer: Vec<NodeId> = vec![seed];

    while !layer.is_empty() && node_ids.len() < cap_n {
        let mut candidates: BTreeSet<NodeId> = BTreeSet::new();
        for &u in &layer {
            for &(v, w) in g.neighbors(u) {
                if w >= m && !index_of.contains_key(&v) && g.degree(v) <= d_max {
                    candidates.insert(v);
                }
            }
        }
        let mut next_layer: Vec<NodeId> = Vec::new();
        for v in candidates {
            if node_ids.len() >= cap_n {
                break;
            }
            index_of.insert(v, node_ids.len() as u32);
            node_ids.push(v);
            next_layer.push(v);
        }
        layer = next_layer;
    }

    let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); node_ids.len()];
    let mut parent_degree: Vec<usize> = Vec::with_capacity(node_ids.len());
    for (i, &u) in node_ids.iter().enumerate() {
        parent_degree.push(g.degree(u));
        for &(v, w) in g.neighbors(u) {
            if w >= m {
                if let Some(&j) = index_of.get(&v) {
                    adjacency[i].push((j, w));
                }
            }
        }
        adjacency[i].sort_unstable_by_key(|&(j, _)| j);
    }

    Ok(Subgraph { seed, node_ids, index_of, adjacency, parent_degree })
}
