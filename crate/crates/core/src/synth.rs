//! Ground-truthed synthetic data: planted-group relationship graphs and
//! spam-injected engagement logs.
//!
//! Generation is single-threaded and fully determined by the spec plus its
//! `rng_seed` (ChaCha20).  Group pairs are drawn densely per group; every
//! remaining pair is drawn through geometric skip-sampling over the linear
//! pair index, so sparse backgrounds on large graphs stay cheap.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EngagementGraph;
use crate::ingest::EngagementEvent;
use crate::NodeId;

/// Name of the RNG algorithm pinned in generated metadata.
pub const RNG_ALGORITHM: &str = "chacha20";

/// A planted-group graph: groups with internal edge probabilities,
/// optional member overlap between consecutive groups, and a global
/// background probability for every uncovered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    /// (size, internal edge probability) per group.
    pub groups: Vec<(usize, f64)>,
    /// (group_i, group_j, shared_node_count); only consecutive groups
    /// (j = i + 1) may overlap.
    #[serde(default)]
    pub overlaps: Vec<(usize, usize, usize)>,
    /// Edge probability for pairs not covered by any group.
    pub background_p: f64,
    /// Extra nodes belonging to no group (they still receive background
    /// edges).
    #[serde(default)]
    pub background_nodes: usize,
    pub rng_seed: u64,
}

/// A spam campaign injected into organic traffic.  Spammers all engage the
/// same `actions_per_spammer` targets, once each, inside short bursts;
/// organic actors engage uniform random targets as a Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamCampaignSpec {
    pub spammer_count: usize,
    pub target_pool_size: usize,
    /// Number of shared campaign targets each spammer hits exactly once.
    pub actions_per_spammer: usize,
    /// Length in seconds of each per-target burst.
    pub burst_window: u64,
    pub organic_actor_count: usize,
    /// Expected actions per organic actor over the whole horizon.
    pub organic_rate: f64,
    /// Pages per spammer owner; a fanout of f assigns one owner id to every
    /// f consecutive spammer accounts.
    pub owner_fanout: usize,
    pub rng_seed: u64,
    /// First valid timestamp.
    #[serde(default = "default_start_ts")]
    pub start_ts: u64,
    /// Length of the generated window in seconds.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
}

fn default_start_ts() -> u64 {
    1_600_000_000
}

fn default_horizon() -> u64 {
    30 * 24 * 3600
}

/// Spreadsheet-style group names: A, B, …, Z, AA, AB, …
pub fn group_name(mut idx: usize) -> String {
    let mut name = Vec::new();
    loop {
        name.push(b'A' + (idx % 26) as u8);
        idx /= 26;
        if idx == 0 {
            break;
        }
        idx -= 1;
    }
    name.reverse();
    String::from_utf8(name).expect("ascii")
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() && self.background_nodes == 0 {
            return Err(Error::Config("planted spec generates no nodes".to_string()));
        }
        for (idx, &(size, p)) in self.groups.iter().enumerate() {
            if size == 0 {
                return Err(Error::Config(format!("group {idx} has size 0")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("group {idx}: probability {p} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.background_p) {
            return Err(Error::Config(format!(
                "background probability {} outside [0, 1]",
                self.background_p
            )));
        }
        let mut seen = BTreeSet::new();
        for &(i, j, count) in &self.overlaps {
            if j != i + 1 || j >= self.groups.len() {
                return Err(Error::Config(format!(
                    "overlap ({i}, {j}): only consecutive group pairs are supported"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::Config(format!("duplicate overlap on group {i}")));
            }
            if count > self.groups[i].0 || count > self.groups[j].0 {
                return Err(Error::Config(format!(
                    "overlap ({i}, {j}): {count} exceeds a group size"
                )));
            }
        }
        Ok(())
    }

    /// First node id of each group under the consecutive-overlap layout.
    fn group_starts(&self) -> Vec<u64> {
        let overlap_after: BTreeMap<usize, usize> = self
            .overlaps
            .iter()
            .map(|&(i, _, count)| (i, count))
            .collect();
        let mut starts = Vec::with_capacity(self.groups.len());
        let mut next = 1u64;
        for (idx, &(size, _)) in self.groups.iter().enumerate() {
            starts.push(next);
            let shared = overlap_after.get(&idx).copied().unwrap_or(0);
            next += (size - shared) as u64;
        }
        starts
    }

    /// Distinct node count including background nodes.
    pub fn node_count(&self) -> usize {
        let group_total: usize = self.groups.iter().map(|&(s, _)| s).sum();
        let shared: usize = self.overlaps.iter().map(|&(_, _, c)| c).sum();
        group_total - shared + self.background_nodes
    }
}

impl SpamCampaignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.target_pool_size == 0 {
            return Err(Error::Config("target pool must be nonempty".to_string()));
        }
        if self.spammer_count > 0 {
            if self.actions_per_spammer == 0 {
                return Err(Error::Config(
                    "spammers need at least one action".to_string(),
                ));
            }
            if self.actions_per_spammer > self.target_pool_size {
                return Err(Error::Config(
                    "campaign needs more distinct targets than the pool holds".to_string(),
                ));
            }
            if self.owner_fanout == 0 {
                return Err(Error::Config("owner fanout must be positive".to_string()));
            }
        }
        if self.organic_actor_count > 0 && !(self.organic_rate > 0.0) {
            return Err(Error::Config("organic rate must be positive".to_string()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".to_string()));
        }
        if self.burst_window >= self.horizon {
            return Err(Error::Config(
                "burst window must fit inside the horizon".to_string(),
            ));
        }
        Ok(())
    }
}

/// Generate the planted graph with per-node ground-truth labels
/// ("A", "A+B", …, or "background").
pub fn generate_planted_graph(
    spec: &PlantedSpec,
) -> Result<(EngagementGraph, BTreeMap<NodeId, String>)> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.rng_seed);
    let starts = spec.group_starts();
    let n = spec.node_count() as u64;

    // Per-node group membership, in group order.
    let mut membership: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (idx, (&start, &(size, _))) in starts.iter().zip(&spec.groups).enumerate() {
        for id in start..start + size as u64 {
            membership.entry(id).or_default().push(idx);
        }
    }

    let mut g = EngagementGraph::default();
    for id in 1..=n {
        g.insert_node(id);
    }
    let mut labels = BTreeMap::new();
    for id in 1..=n {
        let label = match membership.get(&id) {
            Some(groups) => groups
                .iter()
                .map(|&i| group_name(i))
                .collect::<Vec<_>>()
                .join("+"),
            None => "background".to_string(),
        };
        labels.insert(id, label);
    }

    // Covered pairs: probability is the max over groups containing both
    // endpoints.
    let mut covered: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for (idx, (&start, &(size, p))) in starts.iter().zip(&spec.groups).enumerate() {
        let end = start + size as u64;
        for u in start..end {
            for v in (u + 1)..end {
                let entry = covered.entry((u, v)).or_insert(p);
                if p > *entry {
                    *entry = p;
                }
            }
        }
        let _ = idx;
    }
    let mut group_realized = vec![0usize; spec.groups.len()];
    for (&(u, v), &p) in &covered {
        if rng.gen::<f64>() < p {
            g.insert_edge(u, v, 1.0);
            for &gi in &membership[&u] {
                if membership[&v].contains(&gi) {
                    group_realized[gi] += 1;
                }
            }
        }
    }

    // Background pass over every uncovered pair, via geometric skips on the
    // linear pair index.
    let p = spec.background_p;
    if p >= 1.0 {
        for u in 1..=n {
            for v in (u + 1)..=n {
                if !covered.contains_key(&(u, v)) {
                    g.insert_edge(u, v, 1.0);
                }
            }
        }
    } else if p > 0.0 {
        let total_pairs = n * (n - 1) / 2;
        let log_q = (1.0 - p).ln();
        let mut t: u64 = 0;
        loop {
            let u: f64 = rng.gen();
            let gap = ((1.0 - u).ln() / log_q).floor() as u64 + 1;
            t = match t.checked_add(gap) {
                Some(next) => next,
                None => break,
            };
            if t > total_pairs {
                break;
            }
            let (a, b) = pair_from_linear_index(t - 1, n);
            if !covered.contains_key(&(a, b)) {
                g.insert_edge(a, b, 1.0);
            }
        }
    }

    // Calibration check: flag (not fail) groups drifting past 3σ.
    for (idx, &(size, p)) in spec.groups.iter().enumerate() {
        if size < 2 || p <= 0.0 || p >= 1.0 {
            continue;
        }
        let pairs = (size * (size - 1) / 2) as f64;
        let mean = pairs * p;
        let sigma = (pairs * p * (1.0 - p)).sqrt();
        let drift = (group_realized[idx] as f64 - mean).abs();
        if sigma > 0.0 && drift > 3.0 * sigma {
            log::warn!(
                "group {}: realized {} intra edges vs expected {:.1} (drift {:.1}σ)",
                group_name(idx),
                group_realized[idx],
                mean,
                drift / sigma
            );
        }
    }

    Ok((g, labels))
}

/// Map a linear index `t ∈ [0, n(n−1)/2)` to the t-th unordered pair of
/// 1-based node ids, ordered (1,2), (1,3), …, (1,n), (2,3), …
fn pair_from_linear_index(t: u64, n: u64) -> (u64, u64) {
    // cum(i) = pairs whose first index (0-based) is < i.
    let cum = |i: u64| i * (n - 1) - i * i.saturating_sub(1) / 2;
    let mut lo = 0u64;
    let mut hi = n - 1;
    // Largest u with cum(u) ≤ t.
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if cum(mid) <= t {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let u = lo;
    let v = u + 1 + (t - cum(u));
    (u + 1, v + 1)
}

/// Generate a spam-injected engagement log with ground-truth labels
/// ("spammer" / "organic").  Events come out sorted by (timestamp, actor,
/// target) and parse cleanly through the ingest format.
pub fn generate_campaign_log(
    spec: &SpamCampaignSpec,
) -> Result<(Vec<EngagementEvent>, BTreeMap<NodeId, String>)> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.rng_seed);
    const TARGET_BASE: u64 = 1_000_000;
    const OWNER_BASE: u64 = 2_000_000;

    let mut events = Vec::new();
    let mut labels = BTreeMap::new();

    // Campaign: pick distinct targets, give each a burst, let every
    // spammer hit it once inside the burst.
    if spec.spammer_count > 0 {
        let chosen = sample(&mut rng, spec.target_pool_size, spec.actions_per_spammer);
        let mut campaign_targets: Vec<u64> =
            chosen.iter().map(|i| TARGET_BASE + i as u64).collect();
        campaign_targets.sort_unstable();
        for (ti, &target) in campaign_targets.iter().enumerate() {
            let latest_start = spec.start_ts + spec.horizon - spec.burst_window;
            let burst_start = rng.gen_range(spec.start_ts..=latest_start);
            let _ = ti;
            for s in 1..=spec.spammer_count as u64 {
                let ts = burst_start + rng.gen_range(0..=spec.burst_window);
                let owner = OWNER_BASE + (s - 1) / spec.owner_fanout as u64;
                events.push(EngagementEvent {
                    actor: s,
                    target,
                    ts,
                    owner: Some(owner),
                });
            }
        }
        for s in 1..=spec.spammer_count as u64 {
            labels.insert(s, "spammer".to_string());
        }
    }

    // Organic traffic: per actor a Poisson process with the configured
    // expected event count over the horizon.
    if spec.organic_actor_count > 0 {
        let mean_gap = spec.horizon as f64 / spec.organic_rate;
        for o in 0..spec.organic_actor_count as u64 {
            let actor = spec.spammer_count as u64 + 1 + o;
            labels.insert(actor, "organic".to_string());
            let mut clock = spec.start_ts as f64;
            loop {
                let u: f64 = rng.gen();
                clock += -(1.0 - u).ln() * mean_gap;
                if clock >= (spec.start_ts + spec.horizon) as f64 {
                    break;
                }
                let target = TARGET_BASE + rng.gen_range(0..spec.target_pool_size) as u64;
                events.push(EngagementEvent {
                    actor,
                    target,
                    ts: clock as u64,
                    owner: None,
                });
            }
        }
    }

    events.sort_by_key(|e| (e.ts, e.actor, e.target));
    Ok((events, labels))
}

/// Ground-truth labels as `node_id<TAB>label` lines.
pub fn labels_tsv(labels: &BTreeMap<NodeId, String>) -> String {
    let mut out = String::new();
    for (id, label) in labels {
        out.push_str(&format!("{id}\t{label}\n"));
    }
    out
}

/// Events as ingest-format JSONL.
pub fn events_jsonl(events: &[EngagementEvent]) -> Result<String> {
    let mut out = String::new();
    for e in events {
        out.push_str(
            &serde_json::to_string(e).map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}
