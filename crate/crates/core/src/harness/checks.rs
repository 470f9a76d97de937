use serde::{Deserialize, Serialize};

use super::report::{run_check, InequalityReport, Mode};
use super::sample::{Sample, SampleSet};
use crate::error::{LabError, Result};

fn check_sizes<S: Sample>(
    set: &SampleSet<S>,
    id: &str,
    size: impl Fn(usize) -> usize,
) -> Result<()> {
    for t in &set.tuples {
        let n = t.first().map(Sample::dimension).unwrap_or(0);
        if t.len() != size(n) || t.iter().any(|u| u.dimension() != n) {
            return Err(LabError::InvalidArgument(format!(
                "{id}: tuples must hold {} potentials of one dimension",
                size(n)
            )));
        }
    }
    Ok(())
}

/// `∫(-u_0)^p dd^c u_1 ∧ … ∧ dd^c u_n ≤ D · e_p(u_0)^{p/(n+p)} ∏_{j≥1} e_p(u_j)^{1/(n+p)}`.
///
/// For `p = 1` the constant is 1 and every ratio is asserted; otherwise the
/// largest ratio is returned as an estimate of `D(n, p)`, which is at least
/// 1 because diagonal tuples attain equality.
pub fn check_energy_holder<S: Sample>(
    set: &SampleSet<S>,
    p: f64,
    tol: f64,
) -> Result<InequalityReport> {
    let id = format!("energy-holder-p{p}");
    check_sizes(set, &id, |n| n + 1)?;
    let mode = if p == 1.0 {
        Mode::Assert
    } else {
        Mode::EstimateAtLeastOne
    };
    run_check(&id, set.seed, &set.tuples, tol, mode, |t| {
        if t.iter().any(Sample::is_zero) {
            return Ok(None);
        }
        let n = t[0].dimension() as f64;
        let lhs = S::mutual(&t[0], &t[1..], p)?;
        let mut rhs = t[0].energy(p)?.powf(p / (n + p));
        for u in &t[1..] {
            rhs *= u.energy(p)?.powf(1.0 / (n + p));
        }
        Ok(Some((lhs, rhs)))
    })
}

/// `∫(-u_0) dd^c u_1 ∧ … ∧ dd^c u_n ≤ ∏_{j≥1} (∫(-u_0)(dd^c u_j)^n)^{1/n}`.
pub fn check_mass_holder<S: Sample>(set: &SampleSet<S>, tol: f64) -> Result<InequalityReport> {
    check_sizes(set, "mass-holder", |n| n + 1)?;
    run_check(
        "mass-holder",
        set.seed,
        &set.tuples,
        tol,
        Mode::Assert,
        |t| {
            if t.iter().any(Sample::is_zero) {
                return Ok(None);
            }
            let n = t[0].dimension() as f64;
            let lhs = S::mutual(&t[0], &t[1..], 1.0)?;
            let mut rhs = 1.0;
            for u in &t[1..] {
                rhs *= t[0].pair_with_ma(u)?.powf(1.0 / n);
            }
            Ok(Some((lhs, rhs)))
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubadditivityMode {
    /// `mass(u+v)^{1/n} ≤ mass(u)^{1/n} + mass(v)^{1/n}`.
    Mass,
    /// `e(u+v)^{1/(n+1)} ≤ e(u)^{1/(n+1)} + e(v)^{1/(n+1)}`.
    Energy,
}

/// Subadditivity of the mass and energy along sums, on pairs `(u, v)`.
pub fn check_subadditivity<S: Sample>(
    set: &SampleSet<S>,
    mode: SubadditivityMode,
    tol: f64,
) -> Result<InequalityReport> {
    let id = match mode {
        SubadditivityMode::Mass => "subadditivity-mass",
        SubadditivityMode::Energy => "subadditivity-energy",
    };
    check_sizes(set, id, |_| 2)?;
    run_check(id, set.seed, &set.tuples, tol, Mode::Assert, |t| {
        let (u, v) = (&t[0], &t[1]);
        if u.is_zero() && v.is_zero() {
            return Ok(None);
        }
        let n = u.dimension() as f64;
        let w = u.add(v)?;
        let side = |x: &S| -> Result<f64> {
            Ok(match mode {
                SubadditivityMode::Mass => x.mass()?.powf(1.0 / n),
                SubadditivityMode::Energy => x.energy(1.0)?.powf(1.0 / (n + 1.0)),
            })
        };
        Ok(Some((side(&w)?, side(u)? + side(v)?)))
    })
}
