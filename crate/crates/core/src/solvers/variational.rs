use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::model::{apply_t, exp_weights, Geometry, GridConfig, Solution};
use super::trace::{SolverStatus, SolverTrace, TraceRow, TraceSummary};
use crate::error::{LabError, Result};
use crate::radial::{envelope_p, RadialGrid, RadialPotential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariationalStart {
    /// `scale · (|z|² - 1)`.
    Quadratic { scale: f64 },
    /// `T(0, 1)`.
    ApplyT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalConfig {
    pub n: usize,
    pub geometry: Geometry,
    /// Target for the Euler–Lagrange residual (total variation).
    pub tol: f64,
    pub max_iter: usize,
    pub start: VariationalStart,
    /// Armijo constant of the backtracking line search.
    pub armijo: f64,
    pub grid: GridConfig,
}

impl VariationalConfig {
    pub fn new(n: usize, geometry: Geometry) -> Self {
        Self {
            n,
            geometry,
            tol: 1e-10,
            max_iter: 500,
            start: VariationalStart::Quadratic { scale: 1.0 },
            armijo: 1e-4,
            grid: GridConfig::default(),
        }
    }
}

/// `F(χ) = e(χ)/(n+1) - ln Σ_i e^{-χ_i} V_i` for arbitrary node values
/// (`χ_M` is read as the boundary value and should be 0). The energy is the
/// exact `Σ h_i s_i^{n+1}` of the piecewise-linear profile.
pub fn free_energy(grid: &RadialGrid, chi: &[f64]) -> f64 {
    let n = grid.n() as i32;
    let e: f64 = (1..grid.len())
        .map(|i| {
            let h = grid.spacing(i);
            h * ((chi[i] - chi[i - 1]) / h).powi(n + 1)
        })
        .sum();
    e / f64::from(n + 1) - exp_weights(chi, &grid.cell_volumes()).1
}

/// Gradient of [`free_energy`] with respect to the free nodes
/// `0..M`; the boundary entry is 0.
///
/// Component `j` equals `e^{-χ_j} V_j / Z - (s_{j+1}^n - s_j^n)`, the
/// negated residual of the `k = 1` equation at node `j`.
pub fn free_energy_gradient(grid: &RadialGrid, chi: &[f64]) -> Vec<f64> {
    let n = grid.n() as i32;
    let last = grid.last();
    let slope = |i: usize| {
        if i == 0 {
            0.0
        } else {
            (chi[i] - chi[i - 1]) / grid.spacing(i)
        }
    };
    let (p, _) = exp_weights(chi, &grid.cell_volumes());
    let mut g: Vec<f64> = (0..last)
        .map(|j| slope(j).powi(n) - slope(j + 1).powi(n) + p[j])
        .collect();
    g.push(0.0);
    g
}

/// Tridiagonal part of the Hessian of `F` on the free nodes: the exact
/// Hessian of the energy term plus `sign · diag(p)`. The full Hessian is
/// this with `sign = -1` plus the rank-one term `p pᵀ`.
fn tridiagonal_hessian(
    grid: &RadialGrid,
    chi: &[f64],
    p: &[f64],
    sign: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n() as i32;
    let last = grid.last();
    let mut diag: Vec<f64> = p[..last].iter().map(|x| sign * x).collect();
    let mut off = vec![0.0; last.saturating_sub(1)];
    for i in 1..=last {
        let h = grid.spacing(i);
        let s = ((chi[i] - chi[i - 1]) / h).max(0.0);
        let c = f64::from(n) * s.powi(n - 1) / h;
        diag[i - 1] += c;
        if i < last {
            diag[i] += c;
            off[i - 1] -= c;
        }
    }
    (diag, off)
}

/// Thomas algorithm for a symmetric tridiagonal system; `None` unless the
/// matrix is positive definite (all pivots positive).
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = diag[0];
    if !(denom > 0.0) {
        return None;
    }
    c[0] = if m > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if !(denom > 0.0) {
            return None;
        }
        if i < m - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Newton direction when the Hessian is positive definite, otherwise the
/// direction preconditioned by the energy Hessian plus `diag(p)`.
fn descent_direction(grid: &RadialGrid, chi: &[f64], g: &[f64]) -> Vec<f64> {
    let last = grid.last();
    let (p, _) = exp_weights(chi, &grid.cell_volumes());
    let rhs: Vec<f64> = g[..last].iter().map(|x| -x).collect();
    let (diag, off) = tridiagonal_hessian(grid, chi, &p, -1.0);
    let newton = solve_tridiagonal(&diag, &off, &rhs)
        .zip(solve_tridiagonal(&diag, &off, &p[..last]))
        .map(|(a, b)| {
            // Sherman–Morrison for the rank-one term p pᵀ
            let pa: f64 = p.iter().zip(&a).map(|(x, y)| x * y).sum();
            let pb: f64 = p.iter().zip(&b).map(|(x, y)| x * y).sum();
            let factor = pa / (1.0 + pb);
            a.iter()
                .zip(&b)
                .map(|(x, y)| x - factor * y)
                .collect::<Vec<f64>>()
        });
    let mut dir = match newton {
        Some(d) if d.iter().zip(&rhs).map(|(x, y)| x * y).sum::<f64>() > 0.0 => d,
        _ => {
            let (mut diag, off) = tridiagonal_hessian(grid, chi, &p, 1.0);
            let ridge = 1e-12 * diag.iter().fold(0.0f64, |a, &b| a.max(b)) + 1e-300;
            diag.iter_mut().for_each(|d| *d += ridge);
            solve_tridiagonal(&diag, &off, &rhs).unwrap_or(rhs)
        }
    };
    dir.push(0.0);
    dir
}

/// `F(chi + delta) - F(chi)` evaluated from the increments, so that it stays
/// accurate when it is far below the rounding level of `F` itself.
fn free_energy_change(grid: &RadialGrid, chi: &[f64], trial: &[f64]) -> f64 {
    let n = grid.n() as i32;
    let delta: Vec<f64> = trial.iter().zip(chi).map(|(a, b)| a - b).collect();
    let mut de = 0.0;
    for i in 1..grid.len() {
        let h = grid.spacing(i);
        let s = (chi[i] - chi[i - 1]) / h;
        let ds = (delta[i] - delta[i - 1]) / h;
        let t = s + ds;
        // t^{n+1} - s^{n+1} = ds · Σ_j t^j s^{n-j}
        let sum: f64 = (0..=n).map(|j| t.powi(j) * s.powi(n - j)).sum();
        de += h * ds * sum;
    }
    let (p, _) = exp_weights(chi, &grid.cell_volumes());
    let dz: f64 = p.iter().zip(&delta).map(|(p, d)| p * (-d).exp_m1()).sum();
    de / f64::from(n + 1) - dz.ln_1p()
}

/// Minimizes `F` over the radial cone by projected, preconditioned descent:
/// the direction solves the tridiagonal model Hessian against the gradient,
/// every trial point is projected with `P`, and a backtracking line search
/// keeps `F` from increasing.
pub fn variational_solve(config: &VariationalConfig) -> Result<(Solution, SolverTrace)> {
    let grid = check(config)?;
    let start = match config.start {
        VariationalStart::Quadratic { scale } => RadialPotential::new(
            grid.clone(),
            grid.nodes()
                .iter()
                .map(|t| scale * ((2.0 * t).exp() - 1.0))
                .collect(),
        )?,
        VariationalStart::ApplyT => {
            match apply_t(&Solution::Radial(RadialPotential::zero(grid)), 1.0)? {
                Solution::Radial(u) => u,
                Solution::Planar(_) => unreachable!("radial input gives radial output"),
            }
        }
    };
    variational_solve_from(config, start)
}

fn check(config: &VariationalConfig) -> Result<Arc<RadialGrid>> {
    config.geometry.check_dimension(config.n)?;
    if config.geometry != Geometry::Radial {
        return Err(LabError::Unsupported(
            "variational descent is implemented for the radial geometry".into(),
        ));
    }
    if !(config.tol > 0.0) || config.max_iter == 0 || !(config.armijo > 0.0 && config.armijo < 1.0)
    {
        return Err(LabError::InvalidArgument(
            "tol > 0, max_iter ≥ 1 and armijo ∈ (0, 1) are required".into(),
        ));
    }
    config.grid.radial(config.n)
}

/// [`variational_solve`] from a given potential.
pub fn variational_solve_from(
    config: &VariationalConfig,
    start: RadialPotential,
) -> Result<(Solution, SolverTrace)> {
    let _ = check(config)?;
    if start.n() != config.n {
        return Err(LabError::InvalidArgument(
            "start potential has the wrong dimension".into(),
        ));
    }
    let clock = Instant::now();
    let grid = start.grid().clone();
    let mut chi = envelope_p(&grid, start.values())?.into_values();
    let mut f = free_energy(&grid, &chi);
    let mut rows = Vec::new();
    let mut status = SolverStatus::MaxIter;
    let mut note = None;

    for iteration in 0..=config.max_iter {
        let g = free_energy_gradient(&grid, &chi);
        let residual_l1: f64 = g.iter().map(|x| x.abs()).sum();
        let residual_sup = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let u = Solution::Radial(RadialPotential::new_unchecked(grid.clone(), chi.clone())?);
        let mass = u.mass().unwrap_or(f64::NAN);
        let energy = u.energy().unwrap_or(f64::NAN);
        let mut row = TraceRow {
            iteration,
            residual_sup,
            residual_l1,
            mass,
            energy,
            functional: f,
            step: 0.0,
        };
        if residual_l1 <= config.tol {
            rows.push(row);
            status = SolverStatus::Converged;
            break;
        }
        if iteration == config.max_iter {
            rows.push(row);
            break;
        }

        let dir = descent_direction(&grid, &chi, &g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = chi.iter().zip(&dir).map(|(c, d)| c + alpha * d).collect();
            let trial = envelope_p(&grid, &trial)?.into_values();
            let change = free_energy_change(&grid, &chi, &trial);
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&chi))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            if change <= 0.0 && change <= config.armijo * decrease.min(0.0) {
                accepted = Some((trial, f + change));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, f_trial)) => {
                row.step = trial
                    .iter()
                    .zip(&chi)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                rows.push(row);
                chi = trial;
                f = f_trial;
            }
            None => {
                rows.push(row);
                note = Some(format!(
                    "line search failed at iteration {iteration} (F = {f:e})"
                ));
                break;
            }
        }
    }

    let u = Solution::Radial(RadialPotential::new(grid.clone(), chi)?);
    let last_row = rows.last().copied();
    let summary = TraceSummary {
        residual_sup: last_row.map_or(f64::NAN, |r| r.residual_sup),
        equation_residual: last_row.map_or(f64::NAN, |r| r.residual_l1),
        mass: u.mass()?,
        energy: u.energy()?,
        functional: f,
        sup_abs: u.sup_norm(),
    };
    let trace = SolverTrace {
        status,
        iterations: rows.len().saturating_sub(1),
        summary,
        note,
        rows,
        wall_clock: clock.elapsed(),
    };
    Ok((u, trace))
}

/// First-variation probe for `J(u) = -ln ∫ e^{-u} dV` along `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalReport {
    /// `∫ v e^{-u} dV / ∫ e^{-u} dV` with the nodal quadrature.
    pub analytic: f64,
    /// `(t, quotient)`: `(J(u+tv) - J(u))/t` for `t > 0` and
    /// `(J(P(u+tv)) - J(u))/t` for `t < 0`, in input order.
    pub quotients: Vec<(f64, f64)>,
    /// Positive-side quotients lie below the analytic value and negative-side
    /// quotients above it (to rounding).
    pub bracketed: bool,
    /// `|quotient - analytic|` ratios between successive `|t|` on each side,
    /// positive side first, each side ordered by decreasing `|t|`.
    pub gap_ratios: Vec<f64>,
}

/// Difference quotients of `J` at `u` in direction `v`.
pub fn directional_derivative_check(
    u: &RadialPotential,
    v: &RadialPotential,
    t_list: &[f64],
) -> Result<DirectionalReport> {
    crate::radial::ensure_same_grid(u.grid(), v.grid())?;
    if t_list.iter().any(|t| *t == 0.0 || !t.is_finite()) {
        return Err(LabError::InvalidArgument(
            "t values must be finite and nonzero".into(),
        ));
    }
    let grid = u.grid();
    let vols = grid.cell_volumes();
    let j = |chi: &[f64]| -exp_weights(chi, &vols).1;
    let (p, ln_z) = exp_weights(u.values(), &vols);
    let ju = -ln_z;
    let analytic: f64 = p.iter().zip(v.values()).map(|(p, v)| p * v).sum();
    let mut quotients = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let moved: Vec<f64> = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| a + t * b)
            .collect();
        let moved = if t < 0.0 {
            envelope_p(grid, &moved)?.into_values()
        } else {
            moved
        };
        quotients.push((t, (j(&moved) - ju) / t));
    }
    let slack = 1e-12 * analytic.abs().max(1.0);
    let bracketed = quotients.iter().all(|&(t, q)| {
        if t > 0.0 {
            q <= analytic + slack
        } else {
            q >= analytic - slack
        }
    });
    let mut gap_ratios = Vec::new();
    for positive in [true, false] {
        let mut side: Vec<(f64, f64)> = quotients
            .iter()
            .copied()
            .filter(|(t, _)| (*t > 0.0) == positive)
            .collect();
        side.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
        gap_ratios.extend(
            side.windows(2)
                .map(|w| (w[0].1 - analytic).abs() / (w[1].1 - analytic).abs()),
        );
    }
    Ok(DirectionalReport {
        analytic,
        quotients,
        bracketed,
        gap_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::euler_lagrange_residual;

    fn config(n: usize) -> VariationalConfig {
        VariationalConfig {
            grid: GridConfig {
                nodes: 601,
                ..Default::default()
            },
            ..VariationalConfig::new(n, Geometry::Radial)
        }
    }

    #[test]
    fn descent_is_monotone_and_converges() {
        for n in 1..=3 {
            let (u, trace) = variational_solve(&config(n)).unwrap();
            assert_eq!(
                trace.status,
                SolverStatus::Converged,
                "n = {n}: {:?}",
                trace.note
            );
            let fs = trace.functionals();
            assert!(fs.windows(2).all(|w| w[1] <= w[0]), "n = {n}");
            assert!(euler_lagrange_residual(&u).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn gradient_vanishes_at_tridiagonal_solution() {
        let diag = [4.0, 5.0, 6.0];
        let off = [1.0, -2.0];
        let x = solve_tridiagonal(&diag, &off, &[1.0, 2.0, 3.0]).unwrap();
        let back = [
            4.0 * x[0] + x[1],
            x[0] + 5.0 * x[1] - 2.0 * x[2],
            -2.0 * x[1] + 6.0 * x[2],
        ];
        for (a, b) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn change_matches_difference_of_values() {
        let grid = GridConfig {
            nodes: 201,
            ..Default::default()
        }
        .radial(2)
        .unwrap();
        let u = crate::radial::random_potential(&grid, 9, &Default::default());
        let v = crate::radial::random_potential(&grid, 10, &Default::default());
        let trial: Vec<f64> = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| a + 0.1 * b)
            .collect();
        let direct = free_energy(&grid, &trial) - free_energy(&grid, u.values());
        let change = free_energy_change(&grid, u.values(), &trial);
        assert!((direct - change).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn restart_at_minimizer_stops_at_once() {
        let cfg = config(1);
        let (u, first) = variational_solve(&cfg).unwrap();
        let (v, again) = variational_solve_from(&cfg, u.as_radial().unwrap().clone()).unwrap();
        assert_eq!(again.iterations, 0);
        assert!((again.summary.functional - first.summary.functional).abs() <= cfg.tol);
        // re-projecting the start may move it by rounding only
        assert!(u.sup_distance(&v) <= 1e-14);
    }

    #[test]
    fn first_variation_of_quadratic() {
        let grid = GridConfig {
            nodes: 1201,
            ..Default::default()
        }
        .radial(1)
        .unwrap();
        let u = RadialPotential::from_fn(grid, |t| (2.0 * t).exp() - 1.0).unwrap();
        let ts = [1e-2, 5e-3, 2.5e-3, 1e-3, -1e-2, -5e-3, -2.5e-3, -1e-3];
        let rep = directional_derivative_check(&u, &u, &ts).unwrap();
        // continuum value -1/(e - 1)
        assert!((rep.analytic + 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-3);
        assert!(rep.bracketed);
        for r in &rep.gap_ratios {
            assert!((1.5..=6.0).contains(r), "{r}");
        }
        let zero = RadialPotential::zero(u.grid().clone());
        let flat = directional_derivative_check(&u, &zero, &ts).unwrap();
        assert!(flat.quotients.iter().all(|(_, q)| *q == 0.0));
    }

    #[test]
    fn planar_is_rejected() {
        assert!(variational_solve(&VariationalConfig::new(1, Geometry::PlanarDisk)).is_err());
    }
}
