//! Multi-seed orchestration: expand every eligible seed through the
//! sample → spectra → diffusion → sweep → validate chain on a shared
//! read-only graph, then classify detections into tiers.
//!
//! Workers only parallelize across seeds; each seed's computation is
//! single-threaded and deterministic, and results are collected in seed
//! order, so output bytes are independent of `worker_count`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{sweep_cut, AccompliceCluster};
use crate::config::RunConfig;
use crate::diffusion::solve_l1;
use crate::error::{Error, Result};
use crate::graph::EngagementGraph;
use crate::ingest::EngagementBipartite;
use crate::metrics::internal_density;
use crate::sampler::sample_subgraph;
use crate::spectral::local_spectra_with_order;
use crate::validate::{validate_tabc, TabcReport};
use crate::NodeId;

/// One line of the clusters JSONL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub seed: NodeId,
    pub members: Vec<NodeId>,
    pub conductance: f64,
    /// Unweighted internal density measured on the full graph.
    pub density: f64,
    pub tabc: TabcReport,
    pub warnings: Vec<String>,
}

/// One row of the timing summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub seed_id: NodeId,
    pub n_sampled: usize,
    pub lp_iters: usize,
    pub wall_ms: u64,
}

impl TimingRow {
    pub const CSV_HEADER: &'static str = "seed_id,n_sampled,lp_iters,wall_ms";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.seed_id, self.n_sampled, self.lp_iters, self.wall_ms
        )
    }
}

/// Tier classification of detected accounts across all clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    /// Per detected non-seed account: how many distinct seeds' clusters
    /// contain it.
    pub detection_count: BTreeMap<NodeId, usize>,
    /// Accounts detected by more than one seed.
    pub tier1: BTreeSet<NodeId>,
    /// Accounts detected by exactly one seed.
    pub tier2: BTreeSet<NodeId>,
    /// Detection count → number of accounts with that count.
    pub histogram: BTreeMap<usize, usize>,
}

/// Everything a seed's expansion produces.
#[derive(Debug, Clone)]
pub struct SeedExpansion {
    pub cluster: AccompliceCluster,
    pub report: TabcReport,
    pub timing: TimingRow,
}

/// Full pipeline output: per-seed clusters in seed order, serializable
/// records, tiering, timings, and the skip/warning log.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub clusters: Vec<AccompliceCluster>,
    pub records: Vec<ClusterRecord>,
    pub tier: TierReport,
    pub timings: Vec<TimingRow>,
    /// Seeds that produced no cluster, with the reason.
    pub skips: Vec<(NodeId, String)>,
    /// One-line human summary of the run.
    pub summary: String,
}

/// Expand a single eligible seed.  The degree guard is the caller's job;
/// this runs the chain unconditionally.
pub fn expand_seed(
    g: &EngagementGraph,
    b: &EngagementBipartite,
    seed: NodeId,
    cfg: &RunConfig,
) -> Result<SeedExpansion> {
    let start = Instant::now();
    let sg = sample_subgraph(g, seed, cfg.d_max, cfg.cap_n, cfg.m)?;
    let working = if cfg.binary_adjacency { sg.binarized() } else { sg.clone() };
    let spectra = local_spectra_with_order(&working, cfg.k, cfg.l, cfg.krylov_order);
    let diffusion = solve_l1(&spectra, 0, seed)?;
    let mut cluster = sweep_cut(&working, &diffusion, cfg.n_min);
    // Validation consults the weighted subgraph so the edge-weight floor
    // is checked against real weights even in binarized runs.
    let report = validate_tabc(
        &cluster,
        &sg,
        b,
        cfg.n_min,
        cfg.m,
        cfg.rho_min,
        cfg.delta_t,
    )?;
    cluster.tabc_params = Some(report.params);
    cluster.temporal_coherent = report.temporal_coherent;
    // Reported density is measured on the full graph, which may include
    // edges lighter than the sampling floor.
    cluster.internal_density = if cluster.members.len() >= 2 {
        internal_density(g, &cluster.members)?
    } else {
        cluster
            .warnings
            .push("singleton-cluster: density undefined, reported as 0".to_string());
        0.0
    };
    let timing = TimingRow {
        seed_id: seed,
        n_sampled: sg.n(),
        lp_iters: diffusion.lp_iterations,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok(SeedExpansion {
        cluster,
        report,
        timing,
    })
}

/// Run the whole multi-seed pipeline.  Seeds are processed independently
/// (a worker pool of `cfg.worker_count` threads); per-seed failures are
/// logged and isolated; output is sorted by seed id.
pub fn run_pipeline(
    g: &EngagementGraph,
    b: &EngagementBipartite,
    seeds: &BTreeSet<NodeId>,
    cfg: &RunConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("no seeds given".to_string()));
    }

    let seed_list: Vec<NodeId> = seeds.iter().copied().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;

    enum Outcome {
        Expanded(Box<SeedExpansion>),
        Skipped(String),
    }

    let outcomes: Vec<(NodeId, Outcome)> = pool.install(|| {
        seed_list
            .par_iter()
            .map(|&seed| {
                if !g.contains(seed) {
                    return (seed, Outcome::Skipped("seed not present in graph".to_string()));
                }
                let degree = g.degree(seed);
                if degree > cfg.d_max {
                    return (
                        seed,
                        Outcome::Skipped(format!(
                            "seed degree {degree} exceeds d_max {}",
                            cfg.d_max
                        )),
                    );
                }
                match expand_seed(g, b, seed, cfg) {
                    Ok(exp) => (seed, Outcome::Expanded(Box::new(exp))),
                    Err(e) => (seed, Outcome::Skipped(format!("expansion failed: {e}"))),
                }
            })
            .collect()
    });

    let mut clusters = Vec::new();
    let mut records = Vec::new();
    let mut timings = Vec::new();
    let mut skips = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Outcome::Expanded(exp) => {
                let SeedExpansion {
                    cluster,
                    report,
                    timing,
                } = *exp;
                records.push(ClusterRecord {
                    seed,
                    members: cluster.members.iter().copied().collect(),
                    conductance: cluster.conductance,
                    density: cluster.internal_density,
                    tabc: report,
                    warnings: cluster.warnings.clone(),
                });
                clusters.push(cluster);
                timings.push(timing);
            }
            Outcome::Skipped(reason) => {
                log::warn!("seed {seed}: {reason}");
                skips.push((seed, reason));
            }
        }
    }

    let tier = tier_classify(&clusters, seeds);
    let summary = format!(
        "processed {} of {} seeds ({} skipped); {} clusters; tier1 {}, tier2 {}",
        clusters.len(),
        seeds.len(),
        skips.len(),
        clusters.len(),
        tier.tier1.len(),
        tier.tier2.len()
    );
    if clusters.is_empty() {
        log::warn!("no seed survived expansion: {summary}");
    }
    Ok(PipelineOutput {
        clusters,
        records,
        tier,
        timings,
        skips,
        summary,
    })
}

/// Count, per non-seed account, the distinct seeds whose cluster contains
/// it; accounts seen by more than one seed are Tier I, the rest Tier II.
/// Seed accounts themselves are excluded from the universe.
pub fn tier_classify(clusters: &[AccompliceCluster], seeds: &BTreeSet<NodeId>) -> TierReport {
    let mut seen: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for cluster in clusters {
        for &member in &cluster.members {
            if !seeds.contains(&member) {
                seen.entry(member).or_default().insert(cluster.seed);
            }
        }
    }
    let detection_count: BTreeMap<NodeId, usize> =
        seen.into_iter().map(|(acct, s)| (acct, s.len())).collect();
    let mut tier1 = BTreeSet::new();
    let mut tier2 = BTreeSet::new();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for (&acct, &count) in &detection_count {
        *histogram.entry(count).or_insert(0) += 1;
        if count > 1 {
            tier1.insert(acct);
        } else {
            tier2.insert(acct);
        }
    }
    TierReport {
        detection_count,
        tier1,
        tier2,
        histogram,
    }
}

/// Render cluster records as JSONL (one record per line).
pub fn render_clusters_jsonl(records: &[ClusterRecord]) -> Result<String> {
    let mut out = String::new();
    for rec in records {
        out.push_str(
            &serde_json::to_string(rec).map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}

/// Render the timing table as CSV with a header row.
pub fn render_timings_csv(timings: &[TimingRow]) -> String {
    let mut out = String::from(TimingRow::CSV_HEADER);
    out.push('\n');
    for row in timings {
        out.push_str(&row.to_csv_row());
        out.push('\n');
    }
    out
}
