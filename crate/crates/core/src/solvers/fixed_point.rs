use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{apply_t, equation_residual, relax, Geometry, GridConfig, Solution};
use super::trace::{SolverStatus, SolverTrace, TraceRow, TraceSummary};
use crate::error::{LabError, Result};

/// Iterates whose sup-norm exceeds this are declared divergent.
const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initializer {
    /// `u_0 = T(0, k)`, which already has the right mass.
    ApplyT,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub n: usize,
    pub k: f64,
    pub geometry: Geometry,
    /// Damping `η ∈ (0, 1]`.
    pub eta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub initializer: Initializer,
    /// Iterations without a 1% improvement of the best residual before the
    /// run is called oscillating.
    pub patience: usize,
    pub grid: GridConfig,
}

impl FixedPointConfig {
    pub fn new(n: usize, k: f64, geometry: Geometry) -> Self {
        Self {
            n,
            k,
            geometry,
            eta: 0.5,
            tol: default_tol(geometry),
            max_iter: 5000,
            initializer: Initializer::ApplyT,
            patience: 300,
            grid: GridConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.check_dimension(self.n)?;
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "k must be finite and nonnegative, got {}",
                self.k
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(LabError::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if !(self.tol > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(LabError::InvalidArgument(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_tol(geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Radial => 1e-8,
        Geometry::PlanarDisk => 1e-6,
    }
}

/// Damped iteration `u ← P((1 - η) u + η T(u))` for
/// `(dd^c u)^n = k e^{-u} dV / ∫ e^{-u} dV`.
///
/// Non-convergence is reported through the trace status, not as an error.
/// On convergence the returned potential is `T(u)`, which has mass exactly
/// `k`, and it is checked to be a fixed point to `tol` itself.
pub fn fixed_point_solve(config: &FixedPointConfig) -> Result<(Solution, SolverTrace)> {
    config.validate()?;
    let zero = config.grid.zero(config.geometry, config.n)?;
    let init = match config.initializer {
        Initializer::Zero => zero,
        Initializer::ApplyT => apply_t(&zero, config.k)?,
    };
    fixed_point_solve_from(config, init)
}

/// [`fixed_point_solve`] from a given starting potential.
pub fn fixed_point_solve_from(
    config: &FixedPointConfig,
    init: Solution,
) -> Result<(Solution, SolverTrace)> {
    config.validate()?;
    if init.geometry() != config.geometry || init.n() != config.n {
        return Err(LabError::InvalidArgument(
            "initial potential does not match the configuration".into(),
        ));
    }
    let start = Instant::now();
    let k = config.k;
    let mut rows = Vec::new();
    let mut u = init;
    let mut best = f64::INFINITY;
    let mut best_at = 0;

    let finish =
        |status, solution: Solution, rows: Vec<TraceRow>, residual: f64, note: Option<String>| {
            let summary = summarize(&solution, k, residual);
            let trace = SolverTrace {
                status,
                iterations: rows.len(),
                summary,
                note,
                rows,
                wall_clock: start.elapsed(),
            };
            Ok((solution, trace))
        };

    for iteration in 1..=config.max_iter {
        let tu = match apply_t(&u, k) {
            Ok(tu) => tu,
            Err(e) => {
                return finish(
                    SolverStatus::Diverged,
                    u,
                    rows,
                    f64::NAN,
                    Some(e.to_string()),
                )
            }
        };
        let residual_sup = u.sup_distance(&tu);
        let residual_l1 = u.l1_distance(&tu);
        if !residual_sup.is_finite() {
            return finish(
                SolverStatus::Diverged,
                u,
                rows,
                residual_sup,
                Some("non-finite residual".into()),
            );
        }
        let mass = u.mass().unwrap_or(f64::NAN);
        let energy = u.energy().unwrap_or(f64::NAN);
        let functional = u.functional().unwrap_or(f64::NAN);
        let row = |step| TraceRow {
            iteration,
            residual_sup,
            residual_l1,
            mass,
            energy,
            functional,
            step,
        };

        if residual_sup <= config.tol {
            // the returned potential is T(u); accept it only if it is a
            // fixed point to the same tolerance
            if let Ok(ttu) = apply_t(&tu, k) {
                let final_residual = tu.sup_distance(&ttu);
                if final_residual <= config.tol {
                    rows.push(row(residual_sup));
                    return finish(SolverStatus::Converged, tu, rows, final_residual, None);
                }
            }
        }

        let next = match relax(&u, &tu, config.eta) {
            Ok(next) => next,
            Err(e) => {
                return finish(
                    SolverStatus::Diverged,
                    u,
                    rows,
                    residual_sup,
                    Some(e.to_string()),
                )
            }
        };
        let step = next.sup_distance(&u);
        rows.push(row(step));
        if !(next.sup_norm() <= DIVERGENCE_BOUND) {
            let note = format!("iterate left the ball of radius {DIVERGENCE_BOUND:e}");
            return finish(SolverStatus::Diverged, next, rows, residual_sup, Some(note));
        }
        if residual_sup < 0.99 * best {
            best = residual_sup;
            best_at = iteration;
        } else if iteration - best_at > config.patience {
            let note = format!(
                "best residual {best:e} not improved for {} iterations",
                config.patience
            );
            return finish(
                SolverStatus::Oscillating,
                next,
                rows,
                residual_sup,
                Some(note),
            );
        }
        u = next;
    }
    let residual = rows.last().map_or(f64::NAN, |r| r.residual_sup);
    finish(SolverStatus::MaxIter, u, rows, residual, None)
}

fn summarize(u: &Solution, k: f64, residual_sup: f64) -> TraceSummary {
    TraceSummary {
        residual_sup,
        equation_residual: equation_residual(u, k).unwrap_or(f64::NAN),
        mass: u.mass().unwrap_or(f64::NAN),
        energy: u.energy().unwrap_or(f64::NAN),
        functional: u.functional().unwrap_or(f64::NAN),
        sup_abs: u.sup_norm(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KScanRow {
    pub k: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    pub mass: f64,
    pub energy: f64,
    pub sup_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KScan {
    pub n: usize,
    pub rows: Vec<KScanRow>,
    /// `sup|u|` is nondecreasing in `k` over the converged runs.
    pub sup_monotone: bool,
}

/// Runs [`fixed_point_solve`] for every `k` (in parallel), keeping the input
/// order. Statuses are recorded, never asserted.
pub fn k_scan(n: usize, k_list: &[f64], base: &FixedPointConfig) -> Result<KScan> {
    let runs: Vec<Result<KScanRow>> = k_list
        .par_iter()
        .map(|&k| {
            let config = FixedPointConfig {
                n,
                k,
                ..base.clone()
            };
            let (_, trace) = fixed_point_solve(&config)?;
            Ok(KScanRow {
                k,
                status: trace.status,
                iterations: trace.iterations,
                mass: trace.summary.mass,
                energy: trace.summary.energy,
                sup_abs: trace.summary.sup_abs,
                note: trace.note,
            })
        })
        .collect();
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut converged: Vec<&KScanRow> = rows
        .iter()
        .filter(|r| r.status == SolverStatus::Converged)
        .collect();
    converged.sort_by(|a, b| a.k.total_cmp(&b.k));
    let sup_monotone = converged.windows(2).all(|w| w[1].sup_abs >= w[0].sup_abs);
    Ok(KScan {
        n,
        rows,
        sup_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mean_field_oracle() {
        // n = 1: χ(t) = 2 ln((1 + a e^{2t}) / (1 + a)), a = k / (4 - k)
        let mut config = FixedPointConfig::new(1, 1.0, Geometry::Radial);
        config.grid.nodes = 2401;
        let (u, trace) = fixed_point_solve(&config).unwrap();
        assert_eq!(trace.status, SolverStatus::Converged);
        let u = u.as_radial().unwrap();
        let a = 1.0 / 3.0;
        let err = u
            .grid()
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(t, x)| (x - 2.0 * ((1.0 + a * (2.0 * t).exp()) / (1.0 + a)).ln()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert!((trace.summary.mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_k_converges_immediately() {
        let (u, trace) =
            fixed_point_solve(&FixedPointConfig::new(2, 0.0, Geometry::Radial)).unwrap();
        assert_eq!(trace.status, SolverStatus::Converged);
        assert_eq!(trace.iterations, 1);
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn restart_from_solution_stays_converged() {
        let config = FixedPointConfig::new(1, 1.5, Geometry::Radial);
        let (u, _) = fixed_point_solve(&config).unwrap();
        let (_, again) = fixed_point_solve_from(&config, u).unwrap();
        assert_eq!(again.status, SolverStatus::Converged);
        assert!(again.iterations <= 2);
    }

    #[test]
    fn rejects_planar_in_higher_dimension() {
        let config = FixedPointConfig::new(2, 1.0, Geometry::PlanarDisk);
        assert!(matches!(
            fixed_point_solve(&config),
            Err(LabError::Unsupported(_))
        ));
    }

    #[test]
    fn scan_keeps_order() {
        let base = FixedPointConfig {
            grid: GridConfig {
                nodes: 401,
                ..Default::default()
            },
            ..FixedPointConfig::new(1, 1.0, Geometry::Radial)
        };
        let scan = k_scan(1, &[1.5, 0.0, 0.5], &base).unwrap();
        let ks: Vec<f64> = scan.rows.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![1.5, 0.0, 0.5]);
        assert!(scan.sup_monotone);
        assert!(scan
            .rows
            .iter()
            .all(|r| r.status == SolverStatus::Converged));
    }
}
