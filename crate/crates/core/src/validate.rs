//! Threshold validation of a candidate cluster: structural conditions on
//! size, density, and edge weights, plus pairwise temporal coherence
//! against the original engagement log.

use serde::{Deserialize, Serialize};

use crate::cluster::{binary_density_and_edges, AccompliceCluster};
use crate::error::{Error, Result};
use crate::ingest::{temporal_coherence, EngagementBipartite};
use crate::sampler::Subgraph;

/// Thresholds a cluster is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabcParams {
    /// Minimum member count.
    pub n: usize,
    /// Minimum induced edge weight.
    pub m: f64,
    /// Minimum unweighted internal density.
    pub rho: f64,
    /// Temporal half-window: pooled per-target timestamps of a member pair
    /// must span at most `2 * delta_t` seconds.
    pub delta_t: u64,
}

/// Per-condition validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabcReport {
    pub params: TabcParams,
    /// The expanded seed is itself a member.
    pub seed_in_cluster: bool,
    /// Member count reaches `params.n`.
    pub size_ok: bool,
    /// Induced edge count reaches `rho * |C|(|C|-1)/2`.
    pub density_ok: bool,
    /// Every induced edge carries weight at least `params.m`.
    pub weights_ok: bool,
    /// Unweighted internal density actually achieved.
    pub achieved_density: f64,
    /// Induced edge count.
    pub edge_count: usize,
    /// Member pairs whose shared targets all stayed within the window.
    pub verified_pairs: usize,
    /// Member pairs with no shared target in the log; excluded from the
    /// temporal verdict.
    pub unverifiable_pairs: usize,
    /// Member pairs with at least one shared target spanning too long.
    pub incoherent_pairs: usize,
    /// No verifiable pair was incoherent.
    pub temporal_coherent: bool,
    /// Absolute gap between the quadratic-form density and the directly
    /// counted one; must stay below 1e-9.
    pub density_identity_gap: f64,
    /// Structural conditions and temporal coherence all hold.
    pub verdict: bool,
}

/// Validate `cluster` (drawn from `sg`) against thresholds, consulting the
/// engagement log `b` for pairwise temporal coherence.  An empty log leaves
/// every pair unverifiable, so the verdict reduces to the structural
/// conditions.
pub fn validate_tabc(
    cluster: &AccompliceCluster,
    sg: &Subgraph,
    b: &EngagementBipartite,
    n: usize,
    m: f64,
    rho: f64,
    delta_t: u64,
) -> Result<TabcReport> {
    let mut mask = vec![false; sg.n()];
    for &id in &cluster.members {
        match sg.index_of.get(&id) {
            Some(&i) => mask[i as usize] = true,
            None => return Err(Error::NodeMissing(id)),
        }
    }
    let nc = cluster.members.len();

    let seed_in_cluster = cluster.members.contains(&cluster.seed);
    let size_ok = nc >= n;

    let (quad_density, edge_count) = binary_density_and_edges(sg, &mask);
    let counted_density = if nc >= 2 {
        2.0 * edge_count as f64 / (nc * (nc - 1)) as f64
    } else {
        0.0
    };
    let density_identity_gap = (quad_density - counted_density).abs();
    if density_identity_gap > 1e-9 {
        return Err(Error::Internal(format!(
            "density identity violated: quadratic form {quad_density} vs counted {counted_density}"
        )));
    }
    let required_edges = rho * (nc * (nc - 1)) as f64 / 2.0;
    let density_ok = edge_count as f64 >= required_edges;

    let mut weights_ok = true;
    for (i, list) in sg.adjacency.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        for &(j, w) in list {
            if mask[j as usize] && (j as usize) > i && w < m {
                weights_ok = false;
            }
        }
    }

    let members: Vec<u64> = cluster.members.iter().copied().collect();
    let mut verified_pairs = 0usize;
    let mut unverifiable_pairs = 0usize;
    let mut incoherent_pairs = 0usize;
    for (ai, &u) in members.iter().enumerate() {
        for &v in &members[ai + 1..] {
            let tu = b.targets_of(u);
            let tv = b.targets_of(v);
            let shared: Vec<u64> = tu.iter().filter(|t| tv.contains(t)).copied().collect();
            if shared.is_empty() {
                unverifiable_pairs += 1;
                continue;
            }
            let mut coherent = true;
            for t in shared {
                let mut pooled = b.timestamps(u, t);
                pooled.extend(b.timestamps(v, t));
                if !temporal_coherence(&pooled, delta_t)? {
                    coherent = false;
                    break;
                }
            }
            if coherent {
                verified_pairs += 1;
            } else {
                incoherent_pairs += 1;
            }
        }
    }
    let temporal_coherent = incoherent_pairs == 0;

    let structural = seed_in_cluster && size_ok && density_ok && weights_ok;
    Ok(TabcReport {
        params: TabcParams { n, m, rho, delta_t },
        seed_in_cluster,
        size_ok,
        density_ok,
        weights_ok,
        achieved_density: quad_density,
        edge_count,
        verified_pairs,
        unverifiable_pairs,
        incoherent_pairs,
        temporal_coherent,
        density_identity_gap,
        verdict: structural && temporal_coherent,
    })
}
