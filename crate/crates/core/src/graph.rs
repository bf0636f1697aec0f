//! Weighted co-engagement graph: projection of the bipartite onto actors,
//! same-owner weight penalty, and degree reporting.
//!
//! The base weight of an actor pair counts the *distinct* targets they both
//! engaged.  An optional coherence filter only counts a shared target when the
//! pair's pooled timestamps on it fit a `2·delta_t` span.  Targets engaged by
//! more than `hot_target_cap` actors carry no lockstep signal and are skipped
//! to avoid quadratic blowup.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::ingest::{temporal_coherence, EngagementBipartite};
use crate::NodeId;

/// Hot-target guard default: targets with more engaging actors than this are
/// skipped during projection.
pub const DEFAULT_HOT_TARGET_CAP: usize = 10_000;

/// Weighted undirected co-engagement graph over actors.
///
/// Adjacency lists are sorted by neighbor id and kept symmetric; weights are
/// strictly positive.  Immutable after construction; shared read-only by the
/// sampler and pipeline workers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EngagementGraph {
    /// Node → sorted `(neighbor, weight)` list.
    pub adjacency: BTreeMap<NodeId, Vec<(NodeId, f64)>>,
    /// Actor → owning account (self-owned actors map to themselves).
    pub owner_index: BTreeMap<NodeId, NodeId>,
    /// Owner → number of pages it owns (|P(u)|).
    pub pages_per_owner: BTreeMap<NodeId, usize>,
}

impl EngagementGraph {
    /// Node ids, ascending.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.adjacency.contains_key(&node)
    }

    /// Unweighted degree (neighbor count); 0 for absent nodes.
    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency.get(&node).map_or(0, Vec::len)
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        self.adjacency.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Weight of the edge `(a, b)`, or `None` if absent.
    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let list = self.adjacency.get(&a)?;
        list.binary_search_by(|probe| probe.0.cmp(&b))
            .ok()
            .map(|i| list[i].1)
    }

    /// Insert an undirected edge, keeping both adjacency lists sorted.
    /// Intended for construction and tests; panics on self-loops.
    pub fn insert_edge(&mut self, a: NodeId, b: NodeId, w: f64) {
        assert_ne!(a, b, "self-loops are not allowed");
        assert!(w > 0.0, "weights must be positive");
        for (x, y) in [(a, b), (b, a)] {
            let list = self.adjacency.entry(x).or_default();
            match list.binary_search_by(|probe| probe.0.cmp(&y)) {
                Ok(i) => list[i].1 = w,
                Err(i) => list.insert(i, (y, w)),
            }
        }
    }

    /// Ensure a node exists even if isolated.
    pub fn insert_node(&mut self, node: NodeId) {
        self.adjacency.entry(node).or_default();
    }

    /// Owner of a node; absent entries fall back to the node itself.
    pub fn owner_of(&self, node: NodeId) -> NodeId {
        self.owner_index.get(&node).copied().unwrap_or(node)
    }

    /// Serialize to the tab-separated edge-list format: `a<TAB>b<TAB>weight`
    /// with `a < b`, sorted, one edge per line.  Isolated nodes are emitted
    /// as `a<TAB>a<TAB>0` marker lines so they survive a round trip.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (&a, list) in &self.adjacency {
            if list.is_empty() {
                out.push_str(&format!("{a}\t{a}\t0\n"));
                continue;
            }
            for &(b, w) in list {
                if a < b {
                    out.push_str(&format!("{a}\t{b}\t{w}\n"));
                }
            }
        }
        out
    }

    /// Serialize the owner index as `page_id<TAB>owner_id` lines.
    pub fn owners_tsv(&self) -> String {
        let mut out = String::new();
        for (&page, &owner) in &self.owner_index {
            out.push_str(&format!("{page}\t{owner}\n"));
        }
        out
    }

    /// Parse the edge-list format produced by [`EngagementGraph::to_tsv`].
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut g = EngagementGraph::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (a, b, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(w), None) => (a, b, w),
                _ => {
                    return Err(Error::Parse(format!(
                        "graph line {}: expected `a<TAB>b<TAB>weight`",
                        idx + 1
                    )))
                }
            };
            let parse_id = |s: &str| -> Result<NodeId> {
                s.parse::<NodeId>()
                    .map_err(|e| Error::Parse(format!("graph line {}: {e}", idx + 1)))
            };
            let a = parse_id(a)?;
            let b = parse_id(b)?;
            let w: f64 = w
                .parse()
                .map_err(|e| Error::Parse(format!("graph line {}: {e}", idx + 1)))?;
            if a == b {
                if w == 0.0 {
                    g.insert_node(a); // isolated-node marker
                    continue;
                }
                return Err(Error::Parse(format!("graph line {}: self-loop", idx + 1)));
            }
            if w <= 0.0 {
                return Err(Error::Parse(format!(
                    "graph line {}: weight must be positive",
                    idx + 1
                )));
            }
            g.insert_edge(a, b, w);
        }
        Ok(g)
    }

    /// Parse a `page_id<TAB>owner_id` file into the owner maps.
    pub fn load_owners<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(p), Some(o), None) => {
                    let page = p
                        .parse::<NodeId>()
                        .map_err(|e| Error::Parse(format!("owners line {}: {e}", idx + 1)))?;
                    let owner = o
                        .parse::<NodeId>()
                        .map_err(|e| Error::Parse(format!("owners line {}: {e}", idx + 1)))?;
                    self.owner_index.insert(page, owner);
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "owners line {}: expected `page_id<TAB>owner_id`",
                        idx + 1
                    )))
                }
            }
        }
        self.rebuild_owner_counts();
        Ok(())
    }

    /// Recompute `pages_per_owner` from `owner_index`.
    pub fn rebuild_owner_counts(&mut self) {
        self.pages_per_owner.clear();
        for &owner in self.owner_index.values() {
            *self.pages_per_owner.entry(owner).or_insert(0) += 1;
        }
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_tsv().as_bytes())?;
        Ok(())
    }
}

/// Project the bipartite onto actors with the default hot-target cap.
pub fn build_graph(
    b: &EngagementBipartite,
    coherence_delta_t: Option<u64>,
) -> EngagementGraph {
    build_graph_with_cap(b, coherence_delta_t, DEFAULT_HOT_TARGET_CAP)
}

/// Project the bipartite onto actors: each unordered pair gains weight 1 per
/// distinct shared target (subject to the optional coherence filter).  The
/// owner index is carried over from the bipartite, self-owned by default.
pub fn build_graph_with_cap(
    b: &EngagementBipartite,
    coherence_delta_t: Option<u64>,
    hot_target_cap: usize,
) -> EngagementGraph {
    let mut weights: HashMap<(NodeId, NodeId), u64> = HashMap::new();
    for (target, engagements) in b.target_index() {
        // Distinct engaging actors, each with its timestamps on this target.
        let mut per_actor: Vec<(NodeId, Vec<u64>)> = Vec::new();
        for (actor, ts) in engagements {
            match per_actor.last_mut() {
                Some((a, list)) if *a == actor => list.push(ts),
                _ => per_actor.push((actor, vec![ts])),
            }
        }
        if per_actor.len() > hot_target_cap {
            warn!(
                "skipping hot target {target}: {} engaging actors exceed cap {hot_target_cap}",
                per_actor.len()
            );
            continue;
        }
        for i in 0..per_actor.len() {
            for j in i + 1..per_actor.len() {
                if let Some(delta_t) = coherence_delta_t {
                    let mut pooled = per_actor[i].1.clone();
                    pooled.extend_from_slice(&per_actor[j].1);
                    if !temporal_coherence(&pooled, delta_t).expect("pooled list nonempty") {
                        continue;
                    }
                }
                *weights
                    .entry((per_actor[i].0, per_actor[j].0))
                    .or_insert(0) += 1;
            }
        }
    }

    let mut g = EngagementGraph::default();
    for (&(a, bn), &w) in &weights {
        g.insert_edge(a, bn, w as f64);
    }
    // Every actor appears as a node, even if it shares no edge.
    for &actor in &b.actors {
        g.insert_node(actor);
    }
    for &actor in &b.actors {
        let owner = b.owners.get(&actor).copied().unwrap_or(actor);
        g.owner_index.insert(actor, owner);
    }
    g.rebuild_owner_counts();
    debug!(
        "projected {} actors, {} edges",
        g.node_count(),
        g.edge_count()
    );
    g
}

/// Add the same-owner penalty: every *existing* edge between two pages of one
/// owner `u` gains `|P(u)|`.  Endpoints missing from the owner index are
/// treated as self-owned (logged).  No new edges are created.
pub fn apply_owner_penalty(mut g: EngagementGraph) -> EngagementGraph {
    let mut updates: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (&a, list) in &g.adjacency {
        for &(b, w) in list {
            if a >= b {
                continue;
            }
            let owner_a = match g.owner_index.get(&a) {
                Some(&o) => o,
                None => {
                    warn!("node {a} missing from owner index; treating as self-owned");
                    a
                }
            };
            let owner_b = match g.owner_index.get(&b) {
                Some(&o) => o,
                None => {
                    warn!("node {b} missing from owner index; treating as self-owned");
                    b
                }
            };
            if owner_a == owner_b {
                let pages = g.pages_per_owner.get(&owner_a).copied().unwrap_or(1);
                updates.push((a, b, w + pages as f64));
            }
        }
    }
    for (a, b, w) in updates {
        g.insert_edge(a, b, w);
    }
    g
}

/// Exact degree histogram over `node_subset` (default: all nodes).
pub fn degree_histogram(
    g: &EngagementGraph,
    node_subset: Option<&BTreeSet<NodeId>>,
) -> Result<BTreeMap<usize, usize>> {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    match node_subset {
        None => {
            for list in g.adjacency.values() {
                *hist.entry(list.len()).or_insert(0) += 1;
            }
        }
        Some(subset) => {
            for &node in subset {
                if !g.contains(node) {
                    return Err(Error::NodeMissing(node));
                }
                *hist.entry(g.degree(node)).or_insert(0) += 1;
            }
        }
    }
    Ok(hist)
}
