//! Conductance, the sweep cut, and the accomplice cluster it produces.
//!
//! Conductance of a node set is the Rayleigh-style quadratic form
//! `xᵀL x / xᵀD x` — equivalently cut weight over volume.  The sweep ranks
//! nodes by decreasing diffusion mass and minimizes, over prefixes, the
//! two-sided objective `cut / min(vol, total − vol)`; the one-sided form
//! degenerates toward near-full prefixes (their cut is one node's degree
//! while volume keeps growing), so minimization uses the two-sided
//! denominator while `conductance` itself reports the plain cut-over-volume
//! form.

use std::collections::BTreeSet;

use crate::diffusion::DiffusionVector;
use crate::error::{Error, Result};
use crate::sampler::Subgraph;
use crate::validate::TabcParams;
use crate::NodeId;

/// Rayleigh quotient helper around a symmetric dense matrix.
#[derive(Debug, Clone)]
pub struct RayleighQuotient {
    h: Vec<Vec<f64>>,
}

impl RayleighQuotient {
    /// Wrap a symmetric matrix; asymmetry beyond 1e−12 is rejected.
    pub fn new(h: Vec<Vec<f64>>) -> Result<Self> {
        let n = h.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            assert_eq!(h[i].len(), n, "matrix must be square");
            for j in 0..i {
                worst = worst.max((h[i][j] - h[j][i]).abs());
            }
        }
        if worst > 1e-12 {
            return Err(Error::Asymmetric(worst));
        }
        Ok(RayleighQuotient { h })
    }

    /// `xᵀHx / xᵀx` for nonzero `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let denom: f64 = x.iter().map(|v| v * v).sum();
        assert!(denom > 0.0, "x must be nonzero");
        self.quadratic(x) / denom
    }

    /// Plain quadratic form `xᵀHx`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.h.iter().enumerate() {
            let mut inner = 0.0;
            for (j, &hij) in row.iter().enumerate() {
                inner += hij * x[j];
            }
            acc += x[i] * inner;
        }
        acc
    }
}

/// Generalized conductance form `xᵀL x / xᵀD x` on a subgraph, evaluated
/// sparsely: `xᵀLx = Σ_{i<j} w_ij (x_i − x_j)²` and `xᵀDx = Σ d_i x_i²`.
/// A 0/0 (a selection touching no edges) is defined as 0.
pub fn conductance_form(sg: &Subgraph, x: &[f64]) -> f64 {
    let degrees = sg.weighted_degrees();
    let mut num = 0.0;
    for (i, list) in sg.adjacency.iter().enumerate() {
        for &(j, w) in list {
            if (j as usize) > i {
                let d = x[i] - x[j as usize];
                num += w * d * d;
            }
        }
    }
    let den: f64 = degrees.iter().zip(x).map(|(&d, &xi)| d * xi * xi).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Conductance of the selected proper nonempty subset: cut weight leaving
/// the set over the set's weighted volume.
pub fn conductance(sg: &Subgraph, member_indicator: &[bool]) -> Result<f64> {
    assert_eq!(member_indicator.len(), sg.n());
    let selected = member_indicator.iter().filter(|&&b| b).count();
    if selected == 0 || selected == sg.n() {
        return Err(Error::ImproperSubset);
    }
    let x: Vec<f64> = member_indicator.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(conductance_form(sg, &x))
}

/// A seed's accomplice cluster: the sweep-cut prefix with its quality
/// numbers.  Validation fields are filled by `validate_tabc`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccompliceCluster {
    pub seed: NodeId,
    pub members: BTreeSet<NodeId>,
    /// Minimized sweep objective (0 for the degenerate whole-sample case).
    pub conductance: f64,
    /// Unweighted internal density, computed through the quadratic-form
    /// identity on the binarized adjacency.
    pub internal_density: f64,
    /// Induced edge count within the sampled subgraph.
    pub edge_count: usize,
    /// Thresholds this cluster was validated against, once validated.
    pub tabc_params: Option<TabcParams>,
    /// Temporal-coherence verdict, once validated.
    pub temporal_coherent: bool,
    pub warnings: Vec<String>,
}

/// Internal density through the binarized quadratic form
/// `xᵀAx / xᵀ(J−I)x`, together with a directly counted induced edge total.
pub fn binary_density_and_edges(sg: &Subgraph, members: &[bool]) -> (f64, usize) {
    let nc = members.iter().filter(|&&b| b).count();
    let mut quad = 0.0; // xᵀAx on the binarized adjacency
    let mut edges = 0usize;
    for (i, list) in sg.adjacency.iter().enumerate() {
        if !members[i] {
            continue;
        }
        for &(j, _) in list {
            if members[j as usize] {
                quad += 1.0;
                if (j as usize) > i {
                    edges += 1;
                }
            }
        }
    }
    let denom = (nc * nc - nc) as f64; // xᵀ(J−I)x
    let density = if denom > 0.0 { quad / denom } else { 0.0 };
    (density, edges)
}

/// Sweep cut: rank nodes by decreasing `y` (ties toward the smaller node
/// id), evaluate the sweep objective on every prefix of size
/// `n_min ..= N−1`, and return the minimizing prefix — smallest prefix on
/// ties, seed membership enforced.  Subgraphs too small to offer a proper
/// prefix yield the whole sample, flagged low-confidence.
pub fn sweep_cut(sg: &Subgraph, y: &DiffusionVector, n_min: usize) -> AccompliceCluster {
    assert!(n_min >= 1);
    let n = sg.n();
    assert_eq!(y.values.len(), n);
    let mut warnings: Vec<String> = Vec::new();

    if n < n_min + 1 {
        warnings.push(format!(
            "degenerate-whole-sample: {n} sampled nodes cannot offer a proper prefix of {n_min}+ nodes; low confidence"
        ));
        let members_mask = vec![true; n];
        let (density, edges) = binary_density_and_edges(sg, &members_mask);
        return AccompliceCluster {
            seed: sg.seed,
            members: sg.node_ids.iter().copied().collect(),
            conductance: 0.0,
            internal_density: density,
            edge_count: edges,
            tabc_params: None,
            temporal_coherent: false,
            warnings,
        };
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y.values[b]
            .total_cmp(&y.values[a])
            .then(sg.node_ids[a].cmp(&sg.node_ids[b]))
    });

    let degrees = sg.weighted_degrees();
    let total_vol: f64 = degrees.iter().sum();
    let mut in_set = vec![false; n];
    let mut cut = 0.0;
    let mut vol = 0.0;
    // Sweep objective per prefix length (index len − n_min).
    let mut objective_at: Vec<f64> = Vec::with_capacity(n - n_min);
    for &v in order.iter() {
        let internal: f64 = sg.adjacency[v]
            .iter()
            .filter(|&&(j, _)| in_set[j as usize])
            .map(|&(_, w)| w)
            .sum();
        cut += degrees[v] - 2.0 * internal;
        vol += degrees[v];
        in_set[v] = true;
        let len = in_set.iter().filter(|&&b| b).count();
        if len >= n_min && len <= n - 1 {
            let denom = vol.min(total_vol - vol);
            objective_at.push(if denom > 0.0 { cut / denom } else { 0.0 });
        }
    }

    let mut best_len = n_min;
    let mut best_phi = objective_at[0];
    for (idx, &phi) in objective_at.iter().enumerate() {
        if phi < best_phi {
            best_phi = phi;
            best_len = n_min + idx;
        }
    }

    // The seed's dense index is 0; force it into the returned prefix.
    let seed_rank = order.iter().position(|&v| v == 0).expect("seed present");
    if seed_rank >= best_len {
        best_len = seed_rank + 1;
        warnings.push(
            "seed-forced: minimizing prefix omitted the seed; extended to include it".to_string(),
        );
        if best_len >= n {
            best_len = n;
            best_phi = 0.0;
            warnings.push(
                "degenerate-whole-sample: seed ranked last in the sweep; low confidence"
                    .to_string(),
            );
        } else {
            best_phi = objective_at[best_len - n_min];
        }
    }

    let mut members_mask = vec![false; n];
    for &v in &order[..best_len] {
        members_mask[v] = true;
    }
    let (density, edges) = binary_density_and_edges(sg, &members_mask);
    AccompliceCluster {
        seed: sg.seed,
        members: order[..best_len].iter().map(|&v| sg.node_ids[v]).collect(),
        conductance: best_phi,
        internal_density: density,
        edge_count: edges,
        tabc_params: None,
        temporal_coherent: false,
        warnings,
    }
}
