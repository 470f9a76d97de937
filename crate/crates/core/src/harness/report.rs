use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};

/// Relative tolerance for closed-form families.
pub const TOL_CLOSED_FORM: f64 = 1e-8;
/// Relative tolerance for grid families.
pub const TOL_GRID: f64 = 1e-6;
/// Scale factors for the homogeneity check.
pub const HOMOGENEITY_SCALES: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub id: String,
    pub seed: u64,
    pub samples: usize,
    /// Largest `LHS / RHS` over the non-degenerate samples.
    pub worst_ratio: f64,
    pub argmax: String,
    /// Samples with ratio above `1 + tol` (always 0 in estimate mode).
    pub violations: usize,
    pub empirical_constant: Option<f64>,
    pub tol: f64,
    /// Samples where both sides vanish; excluded from the statistics.
    pub degenerate: usize,
    /// Largest relative change of the ratio under `u ↦ λu`.
    pub homogeneity_drift: f64,
    pub homogeneity_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.homogeneity_failures == 0
    }
}

/// How the ratios of a check are judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Mode {
    /// Every ratio must stay below `1 + tol`.
    Assert,
    /// Only the largest ratio is reported; it must be at least `1 - tol`.
    EstimateAtLeastOne,
}

/// Evaluates `sides` on every tuple and on its rescalings, and aggregates.
/// `sides` returns `None` for a degenerate tuple.
pub(crate) fn run_check<S, F>(
    id: &str,
    seed: u64,
    tuples: &[Vec<S>],
    tol: f64,
    mode: Mode,
    sides: F,
) -> Result<InequalityReport>
where
    S: super::Sample,
    F: Fn(&[S]) -> Result<Option<(f64, f64)>> + Sync,
{
    if tuples.is_empty() {
        return Err(LabError::EmptySamples(id.to_string()));
    }
    let ratio = |t: &[S]| -> Result<Option<f64>> {
        Ok(sides(t)?.map(|(lhs, rhs)| {
            if rhs > 0.0 {
                lhs / rhs
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        }))
    };
    let evaluated = tuples
        .par_iter()
        .map(|t| -> Result<Option<(f64, f64)>> {
            let Some(r) = ratio(t)? else { return Ok(None) };
            let mut drift: f64 = 0.0;
            for lambda in HOMOGENEITY_SCALES {
                let scaled: Vec<S> = t.iter().map(|u| u.scale(lambda)).collect();
                if let Some(rs) = ratio(&scaled)? {
                    drift = drift.max(if r == rs {
                        0.0
                    } else {
                        (rs - r).abs() / r.abs().max(f64::MIN_POSITIVE)
                    });
                }
            }
            Ok(Some((r, drift)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut worst = f64::NEG_INFINITY;
    let mut argmax = String::from("none");
    let (mut violations, mut degenerate, mut drift, mut drift_failures) = (0, 0, 0.0f64, 0);
    for (i, e) in evaluated.iter().enumerate() {
        match e {
            None => degenerate += 1,
            Some((r, d)) => {
                if *r > worst {
                    worst = *r;
                    argmax = format!("sample {i}");
                }
                if mode == Mode::Assert && !(*r <= 1.0 + tol) {
                    violations += 1;
                }
                drift = drift.max(*d);
                if *d > tol {
                    drift_failures += 1;
                }
            }
        }
    }
    let empirical_constant = match mode {
        Mode::Assert => None,
        Mode::EstimateAtLeastOne => {
            if !(worst >= 1.0 - tol) {
                violations += 1;
            }
            Some(worst)
        }
    };
    Ok(InequalityReport {
        id: id.to_string(),
        seed,
        samples: tuples.len(),
        worst_ratio: worst,
        argmax,
        violations,
        empirical_constant,
        tol,
        degenerate,
        homogeneity_drift: drift,
        homogeneity_failures: drift_failures,
        note: None,
    })
}
