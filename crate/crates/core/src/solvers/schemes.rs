use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::planar::{
    energy_planar, ma_planar, mollify, poisson_solve, upper_envelope_seq, PlanarDensity,
    PlanarPotential, RelaxationOptions,
};

/// Relative slack for the monotonicity of `∫ -u_j dd^c u_j`.
pub const ENERGY_MONOTONE_TOL: f64 = 1e-6;

/// Slack, relative to `sup |u|`, for the pointwise order of truncated
/// solutions; well above the linear-solver residual.
const ORDER_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeStep {
    pub eps: f64,
    pub mass: f64,
    /// `∫ -u_j dd^c u_j`.
    pub energy: f64,
    /// `sup |(sup_{k≥j} u_k)* - u|` against the direct solution of `μ`.
    pub envelope_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationOutcome {
    /// Direct solution of `μ` (circle atoms handled exactly).
    pub direct: PlanarPotential,
    pub solutions: Vec<PlanarPotential>,
    /// Tail envelopes `(sup_{k≥j} u_k)*`, one per `j`.
    pub envelopes: Vec<PlanarPotential>,
    pub steps: Vec<SchemeStep>,
    pub energy_nondecreasing: bool,
    /// Least-squares slope of `ln(error)` against `ln(ε)`, when every error
    /// is positive.
    pub rate: Option<f64>,
}

/// Mollify-and-solve approximation of `dd^c u = μ` along a decreasing
/// sequence of widths, with the tail upper envelopes of the solutions.
pub fn approximation_scheme(
    mu: &PlanarDensity,
    eps_list: &[f64],
    opts: &RelaxationOptions,
) -> Result<ApproximationOutcome> {
    if eps_list.is_empty() {
        return Err(LabError::InvalidArgument(
            "empty list of mollifier widths".into(),
        ));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(LabError::InvalidArgument(
            "mollifier widths must be distinct".into(),
        ));
    }
    let direct = poisson_solve(mu, opts)?;
    let solutions = eps
        .par_iter()
        .map(|&e| poisson_solve(&mollify(mu, e)?, opts))
        .collect::<Result<Vec<_>>>()?;
    let envelopes = (0..solutions.len())
        .into_par_iter()
        .map(|j| upper_envelope_seq(&solutions, j, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::with_capacity(eps.len());
    for ((e, u), env) in eps.iter().zip(&solutions).zip(&envelopes) {
        steps.push(SchemeStep {
            eps: *e,
            mass: ma_planar(u).total_mass(),
            energy: energy_planar(u, 1.0)?,
            envelope_error: env.sup_distance(&direct),
        });
    }
    let energy_nondecreasing = steps
        .windows(2)
        .all(|w| w[1].energy >= w[0].energy - ENERGY_MONOTONE_TOL * w[0].energy.abs());
    let rate = fit_rate(&steps);
    Ok(ApproximationOutcome {
        direct,
        solutions,
        envelopes,
        steps,
        energy_nondecreasing,
        rate,
    })
}

fn fit_rate(steps: &[SchemeStep]) -> Option<f64> {
    if steps.len() < 2 || steps.iter().any(|s| !(s.envelope_error > 0.0)) {
        return None;
    }
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .map(|s| (s.eps.ln(), s.envelope_error.ln()))
        .collect();
    Some(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let cov: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    cov / var
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationOutcome {
    pub levels: Vec<f64>,
    pub solutions: Vec<PlanarPotential>,
    pub masses: Vec<f64>,
    /// Largest pointwise increase `u_{j'} - u_j` over consecutive levels
    /// `j < j'`; nonpositive up to solver accuracy for a decreasing family.
    pub worst_increase: f64,
    pub monotone: bool,
}

/// Solves `dd^c u_j = min(f, j) dV` for increasing truncation levels.
pub fn truncation_scheme(
    f: &PlanarDensity,
    levels: &[f64],
    opts: &RelaxationOptions,
) -> Result<TruncationOutcome> {
    if !f.atoms().is_empty() {
        return Err(LabError::InvalidArgument(
            "truncation needs a density without circle atoms".into(),
        ));
    }
    if levels.is_empty() || levels.iter().any(|j| !(*j >= 0.0)) {
        return Err(LabError::InvalidArgument(
            "truncation levels must be a nonempty list of nonnegative numbers".into(),
        ));
    }
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    let solutions = levels
        .par_iter()
        .map(|&j| {
            let cut = f.density().iter().map(|v| v.min(j)).collect();
            poisson_solve(
                &PlanarDensity::new(f.grid().clone(), cut, Vec::new())?,
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let masses = solutions
        .iter()
        .map(|u| ma_planar(u).total_mass())
        .collect();
    let worst_increase = solutions
        .windows(2)
        .flat_map(|w| {
            w[1].values()
                .iter()
                .zip(w[0].values())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = solutions.iter().fold(1.0f64, |a, u| a.max(u.sup_norm()));
    let monotone = solutions.len() < 2 || worst_increase <= ORDER_SLACK * scale;
    Ok(TruncationOutcome {
        levels,
        solutions,
        masses,
        worst_increase,
        monotone,
    })
}
