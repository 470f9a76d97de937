use std::sync::Arc;

use super::field::{ensure_same_grid, PlanarPotential};
use super::grid::{apply_stencil, PlanarGrid};
use super::poisson::{default_omega, RelaxationOptions};
use crate::error::{LabError, Result};

/// Largest grid function `w ≤ min(phi, 0)` with nonnegative discrete
/// Laplacian, computed by projected over-relaxation
/// `w ← min(obstacle, relaxed neighbour average)`.
///
/// Convergence is measured by the complementarity residual
/// `max_k |min(obstacle_k − w_k, (Lw)_k / |L_kk|)|`.
pub fn subharmonic_envelope(
    grid: &Arc<PlanarGrid>,
    phi: &[f64],
    opts: &RelaxationOptions,
) -> Result<PlanarPotential> {
    if phi.len() != grid.interior_count() {
        return Err(LabError::GridMismatch(format!(
            "{} values for {} interior nodes",
            phi.len(),
            grid.interior_count()
        )));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(LabError::InvalidArgument(
            "envelope of a non-finite function".into(),
        ));
    }
    let obstacle: Vec<f64> = phi.iter().map(|&v| v.min(0.0)).collect();
    let scale = obstacle.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let tol = opts.tol * scale;
    let stencils = grid.stencils();
    let mut omega = opts.omega.unwrap_or_else(|| default_omega(grid));
    let mut w = obstacle.clone();
    let mut history = Vec::new();
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        for (k, s) in stencils.iter().enumerate() {
            let gs = -apply_stencil(s, &w, 0.0) / s.diag;
            w[k] = obstacle[k].min(w[k] + omega * (gs - w[k]));
        }
        sweeps += 1;
        if sweeps % 10 == 0 {
            let res = complementarity(grid, &w, &obstacle);
            history.push(res);
            if !res.is_finite() || (history.len() > 3 && res > 1e3 * history[0] + scale) {
                omega = 1.0 + 0.5 * (omega - 1.0);
                w.clone_from(&obstacle);
                continue;
            }
            if res <= tol {
                return PlanarPotential::new_unchecked(grid.clone(), w);
            }
        }
    }
    Err(LabError::NoConvergence {
        iterations: sweeps,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

fn complementarity(grid: &PlanarGrid, w: &[f64], obstacle: &[f64]) -> f64 {
    grid.stencils()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let lap = apply_stencil(s, w, w[k]) / s.diag.abs();
            (obstacle[k] - w[k]).min(lap).abs()
        })
        .fold(0.0, f64::max)
}

/// `(sup_{k ≥ j} u_k)` followed by one envelope projection, the discrete
/// stand-in for the upper-semicontinuous regularization.
pub fn upper_envelope_seq(
    us: &[PlanarPotential],
    j: usize,
    opts: &RelaxationOptions,
) -> Result<PlanarPotential> {
    let tail = us.get(j..).filter(|t| !t.is_empty()).ok_or_else(|| {
        LabError::InvalidArgument(format!(
            "no potentials with index ≥ {j} (have {})",
            us.len()
        ))
    })?;
    let first = &tail[0];
    let mut sup = first.values().to_vec();
    for u in &tail[1..] {
        ensure_same_grid(first.grid(), u.grid())?;
        for (s, v) in sup.iter_mut().zip(u.values()) {
            *s = s.max(*v);
        }
    }
    subharmonic_envelope(first.grid(), &sup, opts)
}
