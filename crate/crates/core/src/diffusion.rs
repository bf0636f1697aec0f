//! ℓ1 sparse recovery over the local spectral subspace.
//!
//! The program minimizes `Σᵢ yᵢ` subject to `y = Vz`, `y ≥ 0`, `y(seed) ≥ 1`.
//! Substituting `y = Vz` leaves `d` free variables `z` under `N+1` inequality
//! rows `Gz ≥ h` with `G = [V; V_seed]`, `h = (0,…,0,1)`.  We solve the dual
//! `max hᵀλ  s.t.  Gᵀλ = c, λ ≥ 0` (with `c = Vᵀ1`) by two-phase simplex —
//! a `d × (N+1)` system instead of an `(N+1)`-row primal tableau — and read
//! `z` off the price vector: at optimality the reduced costs give `G(−π) ≥ h`
//! and strong duality makes `−π` optimal for the substituted program.

use crate::error::{Error, Result};
use crate::simplex::{solve_standard_form, SimplexError};
use crate::spectral::LocalSpectra;
use crate::NodeId;

/// Pivot budget for the dual simplex solve.
const LP_ITERATION_CAP: usize = 200_000;

/// Nonnegative likelihood vector over the sampled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionVector {
    /// y, indexed by dense node index.
    pub values: Vec<f64>,
    /// z, the subspace coefficients (length = effective basis dimension).
    pub coefficients: Vec<f64>,
    /// Σᵢ yᵢ at the optimum.
    pub objective: f64,
    /// Simplex pivots spent.
    pub lp_iterations: usize,
}

/// Solve the ℓ1 program over `spectra` for the seed at `seed_index`
/// (dense index 0 in the sampling convention).
pub fn solve_l1(spectra: &LocalSpectra, seed_index: usize, seed: NodeId) -> Result<DiffusionVector> {
    let n = spectra.rows;
    let d = spectra.effective_dim;
    assert!(seed_index < n);
    assert!(d >= 1);

    // Dual standard form: min (−h)ᵀλ  s.t.  Gᵀλ = c, λ ≥ 0.
    // Gᵀ is d × (N+1): column j < N is V's row j; column N repeats the
    // seed row.  c is the vector of column sums of V.
    let mut a: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; d];
    for (r, col) in spectra.basis.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            a[r][j] = v;
        }
        a[r][n] = col[seed_index];
    }
    let b: Vec<f64> = spectra.basis.iter().map(|col| col.iter().sum()).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;

    let solution = match solve_standard_form(&a, &b, &c, LP_ITERATION_CAP) {
        Ok(s) => s,
        Err(SimplexError::Infeasible(r)) => {
            return Err(Error::LpInfeasible {
                seed,
                detail: format!("dual infeasible (residual {r:.3e})"),
            })
        }
        Err(SimplexError::Unbounded) => {
            return Err(Error::LpInfeasible {
                seed,
                detail: "dual unbounded, so the primal admits no feasible y".into(),
            })
        }
        Err(SimplexError::IterationLimit(cap)) => {
            return Err(Error::LpDegenerate(format!(
                "simplex exceeded {cap} pivots on a {d}×{} system",
                n + 1
            )))
        }
    };

    // z = −π restores the substituted program's variables.
    let z: Vec<f64> = solution.prices.iter().map(|&p| -p).collect();
    let mut y = vec![0.0; n];
    for (col, &zr) in spectra.basis.iter().zip(&z) {
        for (yi, &vi) in y.iter_mut().zip(col) {
            *yi += zr * vi;
        }
    }
    let objective: f64 = y.iter().sum();

    // Strong duality cross-check and feasibility diagnostics.
    let dual_opt = -solution.objective;
    if (objective - dual_opt).abs() > 1e-6 * (1.0 + dual_opt.abs()) {
        return Err(Error::LpDegenerate(format!(
            "primal/dual objective gap {:.3e} (primal {objective:.9}, dual {dual_opt:.9})",
            (objective - dual_opt).abs()
        )));
    }
    let min_y = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_y < -1e-8 {
        return Err(Error::LpDegenerate(format!(
            "negative diffusion mass {min_y:.3e} below tolerance"
        )));
    }
    if y[seed_index] < 1.0 - 1e-8 {
        return Err(Error::LpDegenerate(format!(
            "seed constraint violated: y(seed) = {:.9}",
            y[seed_index]
        )));
    }

    Ok(DiffusionVector {
        values: y,
        coefficients: z,
        objective,
        lp_iterations: solution.iterations,
    })
}
