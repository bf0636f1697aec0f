//! Local spectral subspace: normalized adjacency, Krylov basis, and the
//! power-iteration + QR refinement that produces the basis used by the
//! diffusion stage.
//!
//! The normalized adjacency is `Ā = D^{-1/2} (A + I) D^{-1/2}` with weighted
//! degrees; isolated nodes take degree 1 so the normalization stays finite.
//! The starting basis spans the Krylov space of `Ā` at the seed indicator;
//! each refinement step multiplies by `Ā` and re-orthonormalizes by QR
//! (modified Gram–Schmidt with one re-orthogonalization pass).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sampler::Subgraph;

/// Residual threshold (relative to the pre-projection norm) below which a
/// column is declared linearly dependent and dropped.
const RANK_TOL: f64 = 1e-10;

/// Magnitude below which an entry does not determine the sign convention.
const SIGN_TOL: f64 = 1e-12;

/// How many Krylov vectors to generate for a requested dimension `l`.
///
/// `LPlusOne` (the default) spans `{p0, Āp0, …, Ā^l p0}`; `L` stops one power
/// earlier.  Both are exposed because the two readings lead to measurably
/// different recovery behavior; `LPlusOne` recovers planted groups markedly
/// better in benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KrylovOrder {
    L,
    #[default]
    LPlusOne,
}

impl fmt::Display for KrylovOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KrylovOrder::L => write!(f, "l"),
            KrylovOrder::LPlusOne => write!(f, "l+1"),
        }
    }
}

impl FromStr for KrylovOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l" => Ok(KrylovOrder::L),
            "l+1" => Ok(KrylovOrder::LPlusOne),
            other => Err(Error::Config(format!(
                "krylov_order must be `l` or `l+1`, got `{other}`"
            ))),
        }
    }
}

/// Seed indicator vector `p0`: 1 at dense index 0, 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedIndicator {
    pub values: Vec<f64>,
}

impl SeedIndicator {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut values = vec![0.0; n];
        values[0] = 1.0;
        SeedIndicator { values }
    }
}

/// Matrix-free normalized adjacency `Ā = D^{-1/2}(A + I)D^{-1/2}` of a
/// subgraph.
pub struct NormalizedAdjacency<'a> {
    sg: &'a Subgraph,
    dinv_sqrt: Vec<f64>,
}

impl<'a> NormalizedAdjacency<'a> {
    pub fn new(sg: &'a Subgraph) -> Self {
        let dinv_sqrt = sg
            .weighted_degrees()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 })
            .collect();
        NormalizedAdjacency { sg, dinv_sqrt }
    }

    pub fn n(&self) -> usize {
        self.sg.n()
    }

    /// `y = Ā x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        let scaled: Vec<f64> = (0..n).map(|i| self.dinv_sqrt[i] * x[i]).collect();
        let mut out = vec![0.0; n];
        for (i, list) in self.sg.adjacency.iter().enumerate() {
            let mut acc = scaled[i]; // the +I self term
            for &(j, w) in list {
                acc += w * scaled[j as usize];
            }
            out[i] = self.dinv_sqrt[i] * acc;
        }
        out
    }

    /// Dense row-major rendering, `(A+I)_{ij} / sqrt(d_i d_j)`; intended for
    /// small subgraphs and reference checks.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.dinv_sqrt[i] * self.dinv_sqrt[i];
            for &(j, w) in &self.sg.adjacency[i] {
                m[i][j as usize] = w * self.dinv_sqrt[i] * self.dinv_sqrt[j as usize];
            }
        }
        m
    }
}

/// Orthonormal basis of the local spectral subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpectra {
    /// Columns of the basis, each of length `rows`.
    pub basis: Vec<Vec<f64>>,
    pub rows: usize,
    /// Number of refinement steps applied (k).
    pub walk_steps: usize,
    /// Requested subspace dimension (l).
    pub requested_dim: usize,
    /// Columns actually retained after rank handling.
    pub effective_dim: usize,
    /// Largest `‖VᵀV − I‖_F` observed after the initial orthonormalization
    /// and after each refinement step.
    pub max_ortho_error: f64,
}

impl LocalSpectra {
    /// Row `i` of the basis as a point in `R^effective_dim`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.basis.iter().map(|col| col[i]).collect()
    }

    /// Text dump: one row per node in dense-index order, columns separated
    /// by single spaces, 17 significant digits.
    pub fn dump_rows(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = self.basis.iter().map(|col| format!("{:.16e}", col[i])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flip the column so its first entry of magnitude above `SIGN_TOL` is
/// positive; deterministic regardless of upstream rounding.
fn fix_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x.abs() > SIGN_TOL {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.  Columns whose
/// residual after projection falls below `RANK_TOL ×` their pre-projection
/// norm are dropped.  Kept columns are unit-norm and sign-fixed.
fn orthonormalize_columns(candidates: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in candidates {
        let pre_norm = norm(&v);
        if pre_norm == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let r = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= r * qi;
                }
            }
        }
        let res = norm(&v);
        if res < RANK_TOL * pre_norm {
            continue;
        }
        for x in v.iter_mut() {
            *x /= res;
        }
        fix_sign(&mut v);
        basis.push(v);
    }
    basis
}

/// `‖VᵀV − I‖_F` for a set of columns.
pub fn orthonormality_error(basis: &[Vec<f64>]) -> f64 {
    let d = basis.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let g = dot(&basis[i], &basis[j]) - if i == j { 1.0 } else { 0.0 };
            acc += g * g;
        }
    }
    acc.sqrt()
}

/// Orthonormal basis of `span(p0, Āp0, …, Ā^{dim−1} p0)`.
///
/// Vectors are generated Arnoldi-style (each new candidate is `Ā` applied to
/// the last accepted basis vector, which spans the same space); generation
/// stops early when the Krylov sequence becomes rank-deficient.
pub fn krylov_basis(
    op: &NormalizedAdjacency<'_>,
    p0: &SeedIndicator,
    dim: usize,
) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    assert_eq!(p0.values.len(), op.n());
    let mut basis = vec![p0.values.clone()];
    while basis.len() < dim {
        let candidate = op.matvec(basis.last().expect("nonempty"));
        let pre_norm = norm(&candidate);
        let mut v = candidate;
        for _ in 0..2 {
            for q in &basis {
                let r = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= r * qi;
                }
            }
        }
        let res = norm(&v);
        if pre_norm == 0.0 || res < RANK_TOL * pre_norm {
            break; // invariant subspace reached: higher powers add nothing
        }
        for x in v.iter_mut() {
            *x /= res;
        }
        fix_sign(&mut v);
        basis.push(v);
    }
    basis
}

/// Build the local spectral subspace with the default Krylov order.
pub fn local_spectra(sg: &Subgraph, k: usize, l: usize) -> LocalSpectra {
    local_spectra_with_order(sg, k, l, KrylovOrder::default())
}

/// Build the local spectral subspace: an initial Krylov basis followed by
/// `k` rounds of multiplication by `Ā` and QR re-orthonormalization.
pub fn local_spectra_with_order(
    sg: &Subgraph,
    k: usize,
    l: usize,
    order: KrylovOrder,
) -> LocalSpectra {
    assert!(l >= 1, "l must be at least 1");
    let op = NormalizedAdjacency::new(sg);
    let p0 = SeedIndicator::new(sg.n());
    let dim = match order {
        KrylovOrder::L => l,
        KrylovOrder::LPlusOne => l + 1,
    };
    let mut basis = krylov_basis(&op, &p0, dim);
    let mut max_err = orthonormality_error(&basis);
    for _ in 0..k {
        let images: Vec<Vec<f64>> = basis.iter().map(|col| op.matvec(col)).collect();
        basis = orthonormalize_columns(images);
        max_err = max_err.max(orthonormality_error(&basis));
    }
    assert!(!basis.is_empty(), "seed direction cannot vanish");
    LocalSpectra {
        rows: sg.n(),
        effective_dim: basis.len(),
        basis,
        walk_steps: k,
        requested_dim: l,
        max_ortho_error: max_err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EngagementGraph;
    use crate::sampler::sample_subgraph;
    use nalgebra::{DMatrix, DVector};

    fn subgraph_from_edges(seed: u64, edges: &[(u64, u64, f64)]) -> Subgraph {
        let mut g = EngagementGraph::default();
        for &(a, b, w) in edges {
            g.insert_edge(a, b, w);
        }
        g.insert_node(seed);
        sample_subgraph(&g, seed, usize::MAX >> 1, usize::MAX >> 1, 0.0).unwrap()
    }

    fn triangle() -> Subgraph {
        subgraph_from_edges(1, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])
    }

    #[test]
    fn k3_normalized_adjacency_is_all_halves() {
        let sg = triangle();
        let dense = NormalizedAdjacency::new(&sg).dense();
        for row in &dense {
            for &x in row {
                assert!((x - 0.5).abs() < 1e-15, "entry {x}");
            }
        }
    }

    #[test]
    fn singleton_normalized_adjacency_is_identity() {
        let sg = subgraph_from_edges(1, &[]);
        assert_eq!(NormalizedAdjacency::new(&sg).dense(), vec![vec![1.0]]);
    }

    #[test]
    fn dense_matches_elementwise_reference_on_random_graph() {
        let mut g = EngagementGraph::default();
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            state >> 33
        };
        for _ in 0..40 {
            let a = 1 + next() % 20;
            let b = 1 + next() % 20;
            if a != b {
                g.insert_edge(a, b, (1 + next() % 4) as f64);
            }
        }
        let sg = sample_subgraph(&g, *g.adjacency.keys().next().unwrap(), 1000, 1000, 0.0).unwrap();
        let op = NormalizedAdjacency::new(&sg);
        let dense = op.dense();
        let deg = sg.weighted_degrees();
        let n = sg.n();
        for i in 0..n {
            for j in 0..n {
                let a_ij = if i == j {
                    1.0
                } else {
                    sg.weight(i as u32, j as u32).unwrap_or(0.0)
                };
                let di = if deg[i] > 0.0 { deg[i] } else { 1.0 };
                let dj = if deg[j] > 0.0 { deg[j] } else { 1.0 };
                let expected = a_ij / (di * dj).sqrt();
                assert!((dense[i][j] - expected).abs() < 1e-12);
                // Symmetry.
                assert!((dense[i][j] - dense[j][i]).abs() < 1e-12);
            }
        }
        // matvec agrees with the dense rendering.
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = op.matvec(&x);
        for i in 0..n {
            let expected: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
            assert!((y[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn krylov_dim_one_is_the_seed_indicator() {
        let sg = triangle();
        let op = NormalizedAdjacency::new(&sg);
        let basis = krylov_basis(&op, &SeedIndicator::new(3), 1);
        assert_eq!(basis, vec![vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn k3_krylov_saturates_at_dimension_two() {
        let sg = triangle();
        let op = NormalizedAdjacency::new(&sg);
        let basis = krylov_basis(&op, &SeedIndicator::new(3), 3);
        assert_eq!(basis.len(), 2);
        assert!(orthonormality_error(&basis) < 1e-12);
    }

    #[test]
    fn krylov_spans_the_reference_power_sequence() {
        // Path of 5 nodes: projector onto the Krylov basis equals the
        // projector onto an independently orthogonalized {p0, Āp0, Ā²p0}.
        let sg = subgraph_from_edges(
            1,
            &[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0)],
        );
        let op = NormalizedAdjacency::new(&sg);
        let basis = krylov_basis(&op, &SeedIndicator::new(5), 3);
        assert_eq!(basis.len(), 3);

        // Reference: classical Gram–Schmidt on the raw power sequence.
        let p0 = SeedIndicator::new(5).values;
        let p1 = op.matvec(&p0);
        let p2 = op.matvec(&p1);
        let mut reference: Vec<Vec<f64>> = Vec::new();
        for p in [p0, p1, p2] {
            let mut v = p;
            for q in &reference {
                let r = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= r * qi;
                }
            }
            let nrm = norm(&v);
            for x in v.iter_mut() {
                *x /= nrm;
            }
            reference.push(v);
        }
        // Compare projectors VVᵀ.
        let n = 5;
        for i in 0..n {
            for j in 0..n {
                let p_impl: f64 = basis.iter().map(|c| c[i] * c[j]).sum();
                let p_ref: f64 = reference.iter().map(|c| c[i] * c[j]).sum();
                assert!((p_impl - p_ref).abs() < 1e-8, "projector entry ({i},{j})");
            }
        }
    }

    #[test]
    fn singleton_spectra_is_the_unit_basis() {
        let sg = subgraph_from_edges(1, &[]);
        for (k, l) in [(0, 1), (3, 3), (5, 2)] {
            let spectra = local_spectra(&sg, k, l);
            assert_eq!(spectra.basis, vec![vec![1.0]]);
            assert_eq!(spectra.effective_dim, 1);
        }
    }

    #[test]
    fn zero_walk_steps_returns_the_krylov_basis() {
        let sg = triangle();
        let spectra = local_spectra_with_order(&sg, 0, 3, KrylovOrder::L);
        let op = NormalizedAdjacency::new(&sg);
        let krylov = krylov_basis(&op, &SeedIndicator::new(3), 3);
        assert_eq!(spectra.basis, krylov);
        assert_eq!(spectra.walk_steps, 0);
    }

    #[test]
    fn orthonormality_holds_across_parameter_grid() {
        let graphs = [
            triangle(),
            subgraph_from_edges(1, &[(1, 2, 1.0), (2, 3, 2.0), (3, 4, 1.0), (4, 1, 3.0)]),
            subgraph_from_edges(
                1,
                &[(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (4, 6, 2.0)],
            ),
        ];
        for sg in &graphs {
            for k in 0..=4 {
                for l in 1..=4 {
                    for order in [KrylovOrder::L, KrylovOrder::LPlusOne] {
                        let spectra = local_spectra_with_order(sg, k, l, order);
                        assert!(
                            spectra.max_ortho_error < 1e-10,
                            "ortho error {} at k={k} l={l}",
                            spectra.max_ortho_error
                        );
                        for col in &spectra.basis {
                            assert!((norm(col) - 1.0).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn disconnected_support_stays_exactly_zero() {
        // Seed component {1,2,3}; far component {8,9} unreachable.
        let mut g = EngagementGraph::default();
        for &(a, b) in &[(1, 2), (2, 3), (8, 9)] {
            g.insert_edge(a, b, 1.0);
        }
        // Force both components into one "subgraph" by hand.
        let sg = Subgraph {
            seed: 1,
            node_ids: vec![1, 2, 3, 8, 9],
            index_of: [(1, 0), (2, 1), (3, 2), (8, 3), (9, 4)].into_iter().collect(),
            adjacency: vec![
                vec![(1, 1.0)],
                vec![(0, 1.0), (2, 1.0)],
                vec![(1, 1.0)],
                vec![(4, 1.0)],
                vec![(3, 1.0)],
            ],
            parent_degree: vec![1, 2, 1, 1, 1],
        };
        for order in [KrylovOrder::L, KrylovOrder::LPlusOne] {
            let spectra = local_spectra_with_order(&sg, 3, 3, order);
            for col in &spectra.basis {
                assert_eq!(col[3], 0.0);
                assert_eq!(col[4], 0.0);
            }
        }
    }

    #[test]
    fn sign_convention_makes_runs_reproducible() {
        let sg = subgraph_from_edges(
            1,
            &[(1, 2, 2.0), (2, 3, 1.0), (1, 3, 1.0), (3, 4, 1.0)],
        );
        let a = local_spectra(&sg, 3, 3);
        let b = local_spectra(&sg, 3, 3);
        assert_eq!(a, b);
        for col in &a.basis {
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn spectral_norm_bound_against_dense_eigensolver() {
        let graphs = [
            triangle(),
            subgraph_from_edges(1, &[(1, 2, 3.0), (2, 3, 1.0), (3, 4, 2.0), (4, 1, 1.0), (1, 3, 1.0)]),
        ];
        for sg in &graphs {
            let dense = NormalizedAdjacency::new(sg).dense();
            let n = sg.n();
            let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
            let eigen = m.symmetric_eigen();
            let spectral_norm = eigen.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
            let degs = sg.weighted_degrees();
            let bound = 1.0 + degs.iter().fold(f64::INFINITY, |a, &d| a.min(d)).recip();
            assert!(
                spectral_norm <= bound + 1e-9,
                "norm {spectral_norm} vs bound {bound}"
            );
        }
    }

    #[test]
    fn large_k_aligns_with_dominant_eigenvector() {
        let sg = subgraph_from_edges(
            1,
            &[
                (1, 2, 1.0),
                (2, 3, 2.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 1, 1.0),
                (2, 5, 1.0),
                (3, 5, 1.0),
            ],
        );
        let spectra = local_spectra(&sg, 50, 3);
        let dense = NormalizedAdjacency::new(&sg).dense();
        let n = sg.n();
        let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
        let eigen = m.symmetric_eigen();
        let mut top = 0;
        for i in 0..n {
            if eigen.eigenvalues[i] > eigen.eigenvalues[top] {
                top = i;
            }
        }
        let dominant: DVector<f64> = eigen.eigenvectors.column(top).into_owned();
        let first = &spectra.basis[0];
        let cos: f64 = first
            .iter()
            .enumerate()
            .map(|(i, &x)| x * dominant[i])
            .sum::<f64>()
            .abs();
        let angle = cos.clamp(-1.0, 1.0).acos();
        assert!(angle < 1e-3, "angle {angle}");
    }
}
