use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::radial::{energy_p, log_exp_integral, RadialGrid, RadialPotential};

/// Relative growth of a supremum under scan extension that still counts as
/// stable.
pub const STABILITY_TOL: f64 = 1e-2;

/// Inclusive range sampled at `count` equally spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }

    /// Same spacing, `factor` times as long, keeping `hi` fixed when
    /// extending downwards (`hi > lo`, extends `lo`) or upwards.
    fn extended(&self, extend_lo: bool, extend_hi: bool, factor: usize) -> Self {
        let len = self.hi - self.lo;
        let extra = len * (factor - 1) as f64;
        let extra_count = (self.count - 1) * (factor - 1);
        Range {
            lo: if extend_lo { self.lo - extra } else { self.lo },
            hi: if extend_hi { self.hi + extra } else { self.hi },
            count: self.count
                + if extend_lo { extra_count } else { 0 }
                + if extend_hi { extra_count } else { 0 },
        }
    }
}

/// The family `u = m · max(log|z|, c)`, evaluated exactly on a three-node
/// grid with a kink at `c`.
pub fn truncated_log_family(n: usize, m: f64, c: f64) -> Result<RadialPotential> {
    if !(c < 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "truncation level must be negative, got {c}"
        )));
    }
    let grid = RadialGrid::from_nodes(n, vec![2.0 * c - 1.0, c - 0.5, 0.0])?;
    RadialPotential::truncated_log(&grid, m, c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub m: f64,
    pub c: f64,
    pub value: f64,
}

/// Scan of `∫ e^{-u} dV / e^{b e(u)}` over the truncated-log family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpEnergyScan {
    pub n: usize,
    pub b: f64,
    /// `b > 1/(2n)^n`, where boundedness is claimed.
    pub assertion_mode: bool,
    pub m: Range,
    pub c: Range,
    /// Empirical constant `B`: the largest ratio over the scan.
    pub sup: ScanPoint,
    pub sup_log: f64,
    pub argmax_interior: bool,
    /// Largest ratio over the scan extended to twice the length in `m` and `c`.
    pub extended_sup: f64,
    pub stable: bool,
}

impl ExpEnergyScan {
    /// Assertion mode only: finite, interior and stable supremum.
    pub fn passed(&self) -> bool {
        !self.assertion_mode || (self.sup.value.is_finite() && self.argmax_interior && self.stable)
    }
}

fn log_ratio(n: usize, b: f64, m: f64, c: f64) -> Result<f64> {
    let u = truncated_log_family(n, m, c)?;
    Ok(log_exp_integral(&u, 1.0)? - b * energy_p(&u, 1.0)?)
}

/// `ln(∫ e^{-u} dV) - b e(u)` for `u = m max(log|z|, c)`.
pub fn exp_energy_log_ratio(n: usize, b: f64, m: f64, c: f64) -> Result<f64> {
    log_ratio(n, b, m, c)
}

fn argmax(n: usize, b: f64, ms: &[f64], cs: &[f64]) -> Result<(usize, usize, f64)> {
    let rows = ms
        .par_iter()
        .enumerate()
        .map(|(i, &m)| -> Result<(usize, usize, f64)> {
            let mut best = (i, 0, f64::NEG_INFINITY);
            for (j, &c) in cs.iter().enumerate() {
                let v = log_ratio(n, b, m, c)?;
                if v > best.2 {
                    best = (i, j, v);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    // first maximum in scan order, independent of scheduling
    Ok(rows.into_iter().fold(
        (0, 0, f64::NEG_INFINITY),
        |a, r| if r.2 > a.2 { r } else { a },
    ))
}

/// Supremum of the exponential-energy ratio over `m ∈ m_range`,
/// `c ∈ c_range`, with the boundary and extension diagnostics.
pub fn check_exp_energy(n: usize, b: f64, m_range: Range, c_range: Range) -> Result<ExpEnergyScan> {
    if n == 0 || !(b > 0.0) {
        return Err(LabError::InvalidArgument("need n ≥ 1 and b > 0".into()));
    }
    let (ms, cs) = (m_range.points(), c_range.points());
    if ms.len() < 3 || cs.len() < 3 || !(c_range.hi < 0.0) || !(m_range.lo > 0.0) {
        return Err(LabError::InvalidArgument(
            "scan needs ≥ 3 points per axis, m > 0 and c < 0".into(),
        ));
    }
    let (i, j, sup_log) = argmax(n, b, &ms, &cs)?;
    let argmax_interior = i > 0 && i + 1 < ms.len() && j > 0 && j + 1 < cs.len();
    // extend m upwards and c downwards; the grids contain the original points
    let (m_ext, c_ext) = (
        m_range.extended(false, true, 2),
        c_range.extended(true, false, 2),
    );
    let (_, _, ext_log) = argmax(n, b, &m_ext.points(), &c_ext.points())?;
    let threshold = (2.0 * n as f64).powi(n as i32).recip();
    Ok(ExpEnergyScan {
        n,
        b,
        assertion_mode: b > threshold,
        m: m_range,
        c: c_range,
        sup: ScanPoint {
            m: ms[i],
            c: cs[j],
            value: sup_log.exp(),
        },
        sup_log,
        argmax_interior,
        extended_sup: ext_log.exp(),
        stable: ext_log - sup_log <= STABILITY_TOL.ln_1p(),
    })
}

/// Scan of `∫ e^{-2u} dV` over the truncated-log family under a mass bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpMassScan {
    pub n: usize,
    pub mu_bounds: Vec<f64>,
    /// Supremum over the admissible members, one per bound.
    pub sups: Vec<f64>,
    /// Same suprema over the scan extended to twice the length in `c`.
    pub extended_sups: Vec<f64>,
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    pub nondecreasing: bool,
    pub stable: bool,
}

impl ExpMassScan {
    pub fn passed(&self) -> bool {
        self.nondecreasing && self.stable && self.sups.iter().all(|s| s.is_finite())
    }
}

/// For each `μ < n` in `mu_bounds`, the supremum of `∫ e^{-2u} dV` over the
/// members `m · max(log|z|, c)` with mass `m^n ≤ μ^n`; heavier members are
/// rejected and counted.
pub fn check_exp_mass(
    n: usize,
    mu_bounds: &[f64],
    m_values: &[f64],
    c_range: Range,
) -> Result<ExpMassScan> {
    if let Some(mu) = mu_bounds.iter().find(|&&mu| !(mu > 0.0 && mu < n as f64)) {
        return Err(LabError::InvalidArgument(format!(
            "mass bound must lie in (0, n), got {mu}"
        )));
    }
    if !(c_range.hi < 0.0) {
        return Err(LabError::InvalidArgument(
            "truncation levels must be negative".into(),
        ));
    }
    let mut bounds = mu_bounds.to_vec();
    bounds.sort_by(f64::total_cmp);
    let c_ext = c_range.extended(true, false, 2);
    let sup_over = |mu: f64, cs: &[f64]| -> Result<(f64, usize, usize)> {
        let limit = mu.powi(n as i32);
        let (mut best, mut acc, mut rej) = (0.0f64, 0, 0);
        for &m in m_values {
            if m.powi(n as i32) > limit {
                rej += cs.len();
                continue;
            }
            for &c in cs {
                acc += 1;
                best = best.max(log_exp_integral(&truncated_log_family(n, m, c)?, 2.0)?.exp());
            }
        }
        Ok((best, acc, rej))
    };
    let mut sups = Vec::new();
    let mut extended_sups = Vec::new();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for &mu in &bounds {
        let (s, a, r) = sup_over(mu, &c_range.points())?;
        let (e, _, _) = sup_over(mu, &c_ext.points())?;
        sups.push(s);
        extended_sups.push(e);
        accepted.push(a);
        rejected.push(r);
    }
    let nondecreasing = sups.windows(2).all(|w| w[1] >= w[0]);
    let stable = sups
        .iter()
        .zip(&extended_sups)
        .all(|(s, e)| *e <= s * (1.0 + STABILITY_TOL));
    Ok(ExpMassScan {
        n,
        mu_bounds: bounds,
        sups,
        extended_sups,
        accepted,
        rejected,
        nondecreasing,
        stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::exp_integral;

    fn closed_form(m: f64, c: f64) -> (f64, f64) {
        let a = ((2.0 - m) * c).exp();
        (a + 2.0 * (1.0 - a) / (2.0 - m), m * m * c.abs())
    }

    #[test]
    fn family_matches_closed_forms() {
        for (m, c) in [
            (0.5, -0.7),
            (1.0, -3.0),
            (3.0, -10.0),
            (4.0, -30.0),
            (7.5, -0.2),
        ] {
            let u = truncated_log_family(1, m, c).unwrap();
            let (ei, e) = closed_form(m, c);
            assert!(
                (exp_integral(&u, 1.0).unwrap() / ei - 1.0).abs() < 1e-12,
                "m={m} c={c}"
            );
            assert!(
                (energy_p(&u, 1.0).unwrap() / e - 1.0).abs() < 1e-12,
                "m={m} c={c}"
            );
        }
    }

    #[test]
    fn zero_like_member_has_ratio_near_one() {
        let r = exp_energy_log_ratio(1, 0.6, 1e-9, -1e-3).unwrap();
        assert!(r.abs() < 1e-9);
    }

    #[test]
    fn range_extension_contains_original_points() {
        let r = Range::new(-30.0, -0.1, 300);
        let e = r.extended(true, false, 2);
        let pts = e.points();
        for p in r.points() {
            assert!(pts.iter().any(|q| (q - p).abs() < 1e-9));
        }
        assert!((e.lo + 59.9).abs() < 1e-12);
    }

    #[test]
    fn mass_precondition_filters() {
        let scan = check_exp_mass(1, &[0.95], &[0.9, 1.1], Range::new(-30.0, -0.1, 50)).unwrap();
        assert_eq!(scan.rejected, vec![50]);
        assert_eq!(scan.accepted, vec![50]);
        assert!(check_exp_mass(1, &[1.0], &[0.9], Range::new(-3.0, -0.1, 5)).is_err());
    }
}
