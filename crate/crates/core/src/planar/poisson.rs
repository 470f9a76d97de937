//! Dirichlet problem for `dd^c u = μ` on the disk (`Δu = 2f` w.r.t. `dV`).

use serde::{Deserialize, Serialize};

use super::field::{PlanarDensity, PlanarPotential};
use super::grid::{apply_stencil, PlanarGrid};
use crate::error::{LabError, Result};

/// Relaxation controls for the linear and obstacle solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationOptions {
    /// Target for `‖Lu − b‖_∞ / ‖b‖_∞`.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor; `None` picks the estimate for the disk.
    pub omega: Option<f64>,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 200_000,
            omega: None,
        }
    }
}

const CHECK_EVERY: usize = 10;

/// SOR estimate from the first Dirichlet eigenvalue of the unit disk.
pub(crate) fn default_omega(grid: &PlanarGrid) -> f64 {
    const LAMBDA1: f64 = 5.783_185_962_946_784; // j_{0,1}^2
    let h = grid.spacing();
    let rho = (1.0 - LAMBDA1 * h * h / 4.0).max(0.0);
    2.0 / (1.0 + (1.0 - rho * rho).sqrt())
}

/// Solves `L u = rhs` with zero boundary data by successive over-relaxation.
/// Falls back to smaller relaxation factors if the iteration blows up.
pub(crate) fn solve_linear(
    grid: &PlanarGrid,
    rhs: &[f64],
    opts: &RelaxationOptions,
) -> Result<Vec<f64>> {
    let scale = rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut u = vec![0.0; rhs.len()];
    if scale == 0.0 {
        return Ok(u);
    }
    let mut omega = opts.omega.unwrap_or_else(|| default_omega(grid));
    let mut history = Vec::new();
    let stencils = grid.stencils();
    let mut sweeps = 0;
    loop {
        for (k, s) in stencils.iter().enumerate() {
            let off = apply_stencil(s, &u, 0.0);
            let gs = (rhs[k] - off) / s.diag;
            u[k] += omega * (gs - u[k]);
        }
        sweeps += 1;
        if sweeps % CHECK_EVERY == 0 || sweeps >= opts.max_sweeps {
            let res = residual(grid, &u, rhs) / scale;
            history.push(res);
            if !res.is_finite() || (history.len() > 3 && res > 1e3 * history[0]) {
                if omega <= 1.0 {
                    break;
                }
                omega = 1.0 + 0.5 * (omega - 1.0);
                u.iter_mut().for_each(|x| *x = 0.0);
                continue;
            }
            if res <= opts.tol {
                return Ok(u);
            }
        }
        if sweeps >= opts.max_sweeps {
            break;
        }
    }
    Err(LabError::NoConvergence {
        iterations: sweeps,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

fn residual(grid: &PlanarGrid, u: &[f64], rhs: &[f64]) -> f64 {
    grid.stencils()
        .iter()
        .enumerate()
        .map(|(k, s)| (apply_stencil(s, u, u[k]) - rhs[k]).abs())
        .fold(0.0, f64::max)
}

/// Solves `dd^c u = μ` with zero boundary values. The grid part is relaxed
/// on the Shortley–Weller stencil; each circle atom contributes its exact
/// potential `m · max(log|z|, log r)`.
pub fn poisson_solve(mu: &PlanarDensity, opts: &RelaxationOptions) -> Result<PlanarPotential> {
    let grid = mu.grid();
    let rhs: Vec<f64> = mu.density().iter().map(|f| 2.0 * f).collect();
    let mut u = solve_linear(grid, &rhs, opts)?;
    for atom in mu.atoms() {
        let log_r = atom.radius.ln();
        for (k, v) in u.iter_mut().enumerate() {
            let r = grid.radius(k);
            let log_z = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
            *v += atom.mass * log_z.max(log_r);
        }
    }
    PlanarPotential::new_unchecked(grid.clone(), u)
}
