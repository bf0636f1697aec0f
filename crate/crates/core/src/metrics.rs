//! Unweighted quality metrics for a member set measured against the full
//! co-engagement graph: internal density and Flake-ODF.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::EngagementGraph;
use crate::NodeId;

/// Unweighted internal density `2|E'| / (|V'|(|V'|−1))` of the member set
/// within `g`.  Requires at least two members; every member must exist in
/// the graph.
pub fn internal_density(g: &EngagementGraph, members: &BTreeSet<NodeId>) -> Result<f64> {
    check_membership(g, members)?;
    let n = members.len();
    if n < 2 {
        return Err(Error::TooFewMembers(n));
    }
    let mut internal_edges = 0usize;
    for &u in members {
        for &(v, _) in g.neighbors(u) {
            if v > u && members.contains(&v) {
                internal_edges += 1;
            }
        }
    }
    Ok(2.0 * internal_edges as f64 / (n * (n - 1)) as f64)
}

/// Flake out-degree fraction: the share of members with strictly fewer
/// internal neighbors than half their full-graph degree
/// (`2·internal < degree`, in integer counts).  Lower is better; an
/// isolated clique scores 0.
pub fn flake_odf(g: &EngagementGraph, members: &BTreeSet<NodeId>) -> Result<f64> {
    check_membership(g, members)?;
    if members.is_empty() {
        return Err(Error::TooFewMembers(0));
    }
    let mut flakes = 0usize;
    for &u in members {
        let neighbors = g.neighbors(u);
        let degree = neighbors.len();
        let internal = neighbors.iter().filter(|&&(v, _)| members.contains(&v)).count();
        if 2 * internal < degree {
            flakes += 1;
        }
    }
    Ok(flakes as f64 / members.len() as f64)
}

fn check_membership(g: &EngagementGraph, members: &BTreeSet<NodeId>) -> Result<()> {
    for &u in members {
        if !g.contains(u) {
            return Err(Error::NodeMissing(u));
        }
    }
    Ok(())
}
