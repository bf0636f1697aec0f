//! Local seed expansion for lockstep engagement-fraud detection.
//!
//! Starting from a single known-bad account (the seed), the library builds
//! a weighted co-engagement graph from actor→target event logs, samples a
//! bounded neighborhood around the seed, approximates the neighborhood's
//! leading spectral subspace, solves an ℓ1 diffusion program inside that
//! subspace, and sweeps the resulting scores for a low-conductance cluster
//! of likely accomplices.  Clusters are validated against size, density,
//! weight, and temporal-coherence thresholds, and a multi-seed driver
//! classifies detections into repeatedly-seen (Tier I) and once-seen
//! (Tier II) accounts.
//!
//! The `synth` module generates ground-truthed planted graphs and spam
//! campaign logs for calibration and end-to-end testing.

pub mod cluster;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod fsio;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod sampler;
pub mod simplex;
pub mod spectral;
pub mod synth;
pub mod validate;

/// Account / page / target identifier; zero is reserved as invalid.
pub type NodeId = u64;

pub use cluster::{conductance, sweep_cut, AccompliceCluster, RayleighQuotient};
pub use config::RunConfig;
pub use diffusion::{solve_l1, DiffusionVector};
pub use error::{Error, Result};
pub use graph::{apply_owner_penalty, build_graph, degree_histogram, EngagementGraph};
pub use ingest::{parse_events, EngagementBipartite, EngagementEvent, ParseReport};
pub use metrics::{flake_odf, internal_density};
pub use pipeline::{run_pipeline, tier_classify, PipelineOutput, TierReport};
pub use sampler::{sample_subgraph, Subgraph};
pub use spectral::{local_spectra, KrylovOrder, LocalSpectra, SeedIndicator};
pub use synth::{generate_campaign_log, generate_planted_graph, PlantedSpec, SpamCampaignSpec};
pub use validate::{validate_tabc, TabcParams, TabcReport};
