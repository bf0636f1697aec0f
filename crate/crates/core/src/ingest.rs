//! Event-log parsing and the temporal engagement bipartite.
//!
//! Input logs are line-oriented JSON: one `{"actor", "target", "ts", "owner"?}`
//! object per line.  Parsing filters events to an inclusive time window,
//! deduplicates exact `(actor, target, ts)` repeats, and materializes an
//! immutable bipartite structure that downstream stages share read-only.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NodeId;

/// One timestamped actor→target action, optionally attributed to an owner
/// account.  An absent owner means the actor owns itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngagementEvent {
    pub actor: NodeId,
    pub target: NodeId,
    pub ts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<NodeId>,
}

/// Temporal engagement bipartite: actors on one side, targets on the other,
/// timestamped edges in between.  Immutable once built; safe to share across
/// worker threads.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EngagementBipartite {
    pub actors: BTreeSet<NodeId>,
    pub targets: BTreeSet<NodeId>,
    /// Per-actor engagement lists, each sorted by `(target, ts)`.
    pub edges: BTreeMap<NodeId, Vec<(NodeId, u64)>>,
    /// Actor → owning account, for actors whose events carried an owner.
    pub owners: BTreeMap<NodeId, NodeId>,
    /// Inclusive aggregation window.
    pub window: (u64, u64),
}

/// Outcome counters and per-line rejects from a parse run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Events retained in the bipartite.
    pub parsed: usize,
    /// Well-formed events whose timestamp fell outside the window.
    pub dropped_by_window: usize,
    /// Exact (actor, target, ts) repeats that were discarded.
    pub deduplicated: usize,
    /// Malformed lines: (1-based line number, reason).
    pub rejects: Vec<(usize, String)>,
}

impl ParseReport {
    /// Render the reject report as one `line<TAB>reason` row per reject.
    pub fn reject_lines(&self) -> String {
        let mut out = String::new();
        for (line, reason) in &self.rejects {
            out.push_str(&format!("{line}\t{reason}\n"));
        }
        out
    }
}

impl EngagementBipartite {
    /// Number of retained engagement edges.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    /// An empty bipartite over the given window, used when no event log is
    /// available (every pair is then temporally unverifiable).
    pub fn empty(window: (u64, u64)) -> Self {
        Self { window, ..Self::default() }
    }

    /// Timestamps of `actor`'s engagements with `target` (empty if none).
    pub fn timestamps(&self, actor: NodeId, target: NodeId) -> Vec<u64> {
        match self.edges.get(&actor) {
            None => Vec::new(),
            Some(list) => list
                .iter()
                .filter(|(t, _)| *t == target)
                .map(|&(_, ts)| ts)
                .collect(),
        }
    }

    /// Target ids engaged by `actor`, deduplicated, ascending.
    pub fn targets_of(&self, actor: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = match self.edges.get(&actor) {
            None => return Vec::new(),
            Some(list) => list.iter().map(|&(t, _)| t).collect(),
        };
        out.dedup();
        out
    }

    /// Index targets → engaging `(actor, ts)` pairs, sorted by `(actor, ts)`.
    pub fn target_index(&self) -> BTreeMap<NodeId, Vec<(NodeId, u64)>> {
        let mut index: BTreeMap<NodeId, Vec<(NodeId, u64)>> = BTreeMap::new();
        for (&actor, list) in &self.edges {
            for &(target, ts) in list {
                index.entry(target).or_default().push((actor, ts));
            }
        }
        for list in index.values_mut() {
            list.sort_unstable();
        }
        index
    }

    /// Serialize back to the event-log line format (one JSON object per
    /// line), in deterministic `(actor, target, ts)` order.
    pub fn to_event_lines(&self) -> String {
        let mut out = String::new();
        for (&actor, list) in &self.edges {
            let owner = self.owners.get(&actor).copied();
            for &(target, ts) in list {
                let ev = EngagementEvent { actor, target, ts, owner };
                out.push_str(&serde_json::to_string(&ev).expect("event serializes"));
                out.push('\n');
            }
        }
        out
    }
}

/// Parse a line-oriented event log, retaining events inside the inclusive
/// `window`.  Malformed lines are recorded in the report and skipped; an
/// unreadable stream is fatal.
pub fn parse_events<R: BufRead>(
    stream: R,
    window: (u64, u64),
) -> Result<(EngagementBipartite, ParseReport)> {
    if window.0 > window.1 {
        return Err(Error::Config(format!(
            "window start {} exceeds window end {}",
            window.0, window.1
        )));
    }
    let mut report = ParseReport::default();
    let mut events: Vec<EngagementEvent> = Vec::new();
    for (idx, line) in stream.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?; // unreadable stream: fatal
        if line.trim().is_empty() {
            continue;
        }
        let ev: EngagementEvent = match serde_json::from_str(&line) {
            Ok(ev) => ev,
            Err(e) => {
                report.rejects.push((line_no, e.to_string()));
                continue;
            }
        };
        if ev.actor == 0 || ev.target == 0 {
            report.rejects.push((line_no, "zero actor or target id".to_string()));
            continue;
        }
        if ev.ts < window.0 || ev.ts > window.1 {
            report.dropped_by_window += 1;
            continue;
        }
        events.push(ev);
    }
    Ok((assemble(events, window, &mut report), report))
}

/// Build a bipartite from already-parsed events (window-filtered, deduplicated).
pub fn bipartite_from_events(events: &[EngagementEvent], window: (u64, u64)) -> EngagementBipartite {
    let mut report = ParseReport::default();
    let kept: Vec<EngagementEvent> = events
        .iter()
        .copied()
        .filter(|ev| ev.ts >= window.0 && ev.ts <= window.1)
        .collect();
    assemble(kept, window, &mut report)
}

fn assemble(
    mut events: Vec<EngagementEvent>,
    window: (u64, u64),
    report: &mut ParseReport,
) -> EngagementBipartite {
    // Exact (actor, target, ts) repeats collapse; distinct timestamps on the
    // same pair are all kept — they carry the temporal evidence.
    events.sort_unstable_by_key(|ev| (ev.actor, ev.target, ev.ts));
    let before = events.len();
    events.dedup_by_key(|ev| (ev.actor, ev.target, ev.ts));
    report.deduplicated += before - events.len();
    report.parsed += events.len();

    let mut b = EngagementBipartite { window, ..EngagementBipartite::default() };
    for ev in events {
        b.actors.insert(ev.actor);
        b.targets.insert(ev.target);
        b.edges.entry(ev.actor).or_default().push((ev.target, ev.ts));
        if let Some(owner) = ev.owner {
            b.owners.insert(ev.actor, owner);
        }
    }
    // Sort order (target, ts) is already guaranteed by the event sort above.
    b
}

/// Whether all timestamps fit a `2·delta_t` span: true iff there exists a
/// reference time `t_r` with `|t_r − t| ≤ delta_t` for every `t`, i.e. iff
/// `max − min ≤ 2·delta_t`.
pub fn temporal_coherence(events: &[u64], delta_t: u64) -> Result<bool> {
    if events.is_empty() {
        return Err(Error::EmptyCoherence);
    }
    let min = *events.iter().min().expect("nonempty");
    let max = *events.iter().max().expect("nonempty");
    Ok(max - min <= delta_t.saturating_mul(2))
}
