//! Error type shared across the crate.

use thiserror::Error;

use crate::NodeId;

/// Errors produced by graph construction, sampling, diffusion, and validation.
#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("seed {0} is not present in the graph")]
    SeedMissing(NodeId),

    #[error("node {0} is not present in the graph")]
    NodeMissing(NodeId),

    #[error("coherence check on an empty timestamp list is vacuous")]
    EmptyCoherence,

    #[error("need at least 2 members, got {0}")]
    TooFewMembers(usize),

    #[error("indicator must select a nonempty proper subset of the subgraph")]
    ImproperSubset,

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    Asymmetric(f64),

    #[error("l1 program infeasible for seed {seed}: {detail}")]
    LpInfeasible { seed: NodeId, detail: String },

    #[error("l1 program numerically degenerate: {0}")]
    LpDegenerate(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
