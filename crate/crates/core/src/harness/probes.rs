use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::sample::derive_seed;
use crate::error::{LabError, Result};
use crate::planar::{poisson_solve, PlanarDensity, RelaxationOptions};
use crate::radial::{
    energy_p, pairing, random_potential, volume_integral, RadialGrid, RadialMeasure,
    RadialPotential, SamplerParams,
};
use crate::solvers::least_squares_slope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct M1Estimate {
    /// `max ∫(-u) dμ / e(u)^{1/(n+1)}` over the samples.
    pub estimate: f64,
    /// Running maximum after each sample; nondecreasing by construction.
    pub running_max: Vec<f64>,
    pub seed: u64,
}

/// Lower estimate of the smallest `A` with `∫(-u) dμ ≤ A e(u)^{1/(n+1)}`,
/// from random potentials on the grid of `μ`.
pub fn estimate_m1_constant(
    mu: &RadialMeasure,
    sample_count: usize,
    seed: u64,
) -> Result<M1Estimate> {
    let grid = mu.grid();
    let n = grid.n() as f64;
    if mu.total_mass() == 0.0 {
        return Ok(M1Estimate {
            estimate: 0.0,
            running_max: vec![0.0; sample_count],
            seed,
        });
    }
    let params = SamplerParams::default();
    let ratios = (0..sample_count)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let u = random_potential(grid, derive_seed(seed, i, 0), &params);
            let e = energy_p(&u, 1.0)?;
            if e == 0.0 {
                return Ok(0.0);
            }
            Ok(pairing(&u, mu, 1.0)? / e.powf(1.0 / (n + 1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    let running_max: Vec<f64> = ratios
        .iter()
        .map(|r| {
            best = best.max(*r);
            best
        })
        .collect();
    Ok(M1Estimate {
        estimate: best,
        running_max,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub scale: f64,
    pub l2_diff: f64,
    pub sup_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub sup_diff: f64,
    pub l2_diff: f64,
    /// Slope of `ln sup_diff` against `ln l2_diff` over the scan; `None`
    /// when the densities coincide.
    pub fitted_exponent: Option<f64>,
    pub scan: Vec<StabilityPoint>,
}

/// Sup-norm gap of the solutions of `dd^c u = ρ_1` and `dd^c v = ρ_2`
/// against the `L²(dV)` gap of the densities, and the exponent fitted over
/// the perturbations `ρ_1 + s (ρ_2 - ρ_1)`, `s ∈ scales`.
pub fn stability_probe(
    rho1: &PlanarDensity,
    rho2: &PlanarDensity,
    scales: &[f64],
    opts: &RelaxationOptions,
) -> Result<StabilityReport> {
    if !rho1.atoms().is_empty() || !rho2.atoms().is_empty() {
        return Err(LabError::InvalidArgument(
            "stability probe needs square-integrable densities".into(),
        ));
    }
    if scales.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(LabError::InvalidArgument(
            "perturbation scales must lie in (0, 1]".into(),
        ));
    }
    let l2_diff = rho1.l2_distance(rho2)?;
    let u1 = poisson_solve(rho1, opts)?;
    if l2_diff == 0.0 {
        return Ok(StabilityReport {
            sup_diff: 0.0,
            l2_diff,
            fitted_exponent: None,
            scan: Vec::new(),
        });
    }
    let u2 = poisson_solve(rho2, opts)?;
    let grid = rho1.grid().clone();
    let scan = scales
        .par_iter()
        .map(|&s| -> Result<StabilityPoint> {
            let mixed = rho1
                .density()
                .iter()
                .zip(rho2.density())
                .map(|(a, b)| a + s * (b - a))
                .collect();
            let rho = PlanarDensity::new(grid.clone(), mixed, Vec::new())?;
            let u = poisson_solve(&rho, opts)?;
            Ok(StabilityPoint {
                scale: s,
                l2_diff: rho.l2_distance(rho1)?,
                sup_diff: u.sup_distance(&u1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = scan
        .iter()
        .filter(|p| p.l2_diff > 0.0 && p.sup_diff > 0.0)
        .map(|p| (p.l2_diff.ln(), p.sup_diff.ln()))
        .collect();
    let fitted_exponent = (pts.len() >= 2).then(|| least_squares_slope(&pts));
    Ok(StabilityReport {
        sup_diff: u1.sup_distance(&u2),
        l2_diff,
        fitted_exponent,
        scan,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Row {
    pub j: f64,
    pub energy: f64,
    /// `∫ (-u_j) dV`.
    pub against_volume: f64,
    /// `∫ (-u_j) (dd^c w)^n` for `w = |z|² - 1`, i.e. `2^n ∫ (-u_j) dV`.
    pub against_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Report {
    pub n: usize,
    pub rows: Vec<L1Row>,
    /// Largest `|e(u_j) - 1|`.
    pub energy_error: f64,
    pub decreasing: bool,
    /// First over last value of each integral.
    pub decay_volume: f64,
    pub decay_w: f64,
}

/// The family `u_j = j^{1/(n+1)} max(log|z|, -1/j)`: unit energy, vanishing
/// `L¹` norms.
pub fn l1_convergence_probe(n: usize, j_list: &[f64]) -> Result<L1Report> {
    if n == 0 || j_list.is_empty() || j_list.iter().any(|j| !(*j >= 1.0)) {
        return Err(LabError::InvalidArgument(
            "need n ≥ 1 and levels j ≥ 1".into(),
        ));
    }
    let grid = Arc::new(RadialGrid::from_nodes(n, vec![-3.0, -2.0, 0.0])?);
    let w_factor = 2f64.powi(n as i32);
    let rows = j_list
        .iter()
        .map(|&j| -> Result<L1Row> {
            let m = j.powf(1.0 / (n as f64 + 1.0));
            let u = RadialPotential::truncated_log(&grid, m, -1.0 / j)?;
            let v = volume_integral(&u);
            Ok(L1Row {
                j,
                energy: energy_p(&u, 1.0)?,
                against_volume: v,
                against_w: w_factor * v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let energy_error = rows
        .iter()
        .map(|r| (r.energy - 1.0).abs())
        .fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| {
        (w[1].j <= w[0].j)
            || (w[1].against_volume < w[0].against_volume && w[1].against_w < w[0].against_w)
    });
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    Ok(L1Report {
        n,
        energy_error,
        decreasing,
        decay_volume: first.against_volume / last.against_volume,
        decay_w: first.against_w / last.against_w,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::PlanarGrid;
    use crate::radial::ma_measure;

    #[test]
    fn zero_measure_has_zero_constant() {
        let grid = Arc::new(RadialGrid::uniform(1, -10.0, 101).unwrap());
        let est = estimate_m1_constant(&RadialMeasure::zero(grid), 10, 1).unwrap();
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn running_max_is_monotone() {
        let grid = Arc::new(RadialGrid::uniform(1, -10.0, 201).unwrap());
        let mu = RadialMeasure::from_volume_density(grid, |_| 2.0).unwrap();
        let est = estimate_m1_constant(&mu, 50, 7).unwrap();
        assert!(est.running_max.windows(2).all(|w| w[1] >= w[0]));
        assert!(est.estimate.is_finite() && est.estimate > 0.0);
    }

    #[test]
    fn probe_is_symmetric_and_linear() {
        let g = Arc::new(PlanarGrid::new(32).unwrap());
        let opts = RelaxationOptions::default();
        let a = PlanarDensity::from_fn(g.clone(), |x, _| 1.0 + x * x).unwrap();
        let b = PlanarDensity::from_fn(g, |_, y| 1.0 + (3.0 * y).cos().abs()).unwrap();
        let scales = [1.0, 0.5, 0.25, 0.125];
        let ab = stability_probe(&a, &b, &scales, &opts).unwrap();
        let ba = stability_probe(&b, &a, &scales, &opts).unwrap();
        assert!((ab.sup_diff - ba.sup_diff).abs() <= 1e-9 * ab.sup_diff);
        assert!((ab.fitted_exponent.unwrap() - 1.0).abs() < 1e-3);
        let same = stability_probe(&a, &a, &scales, &opts).unwrap();
        assert_eq!(same.sup_diff, 0.0);
        assert!(same.fitted_exponent.is_none());
    }

    #[test]
    fn family_has_unit_energy() {
        for n in 1..=3 {
            let rep = l1_convergence_probe(n, &[1.0, 10.0, 100.0]).unwrap();
            assert!(rep.energy_error < 1e-12, "n = {n}");
            assert!(rep.decreasing);
        }
    }

    #[test]
    fn w_pairing_matches_monge_ampere_of_w() {
        // (dd^c (|z|^2 - 1))^n = 2^n dV, checked on a fine grid
        let grid = Arc::new(RadialGrid::uniform(2, -12.0, 4001).unwrap());
        let w = RadialPotential::from_fn(grid.clone(), |t| (2.0 * t).exp() - 1.0).unwrap();
        let u = RadialPotential::from_fn(grid, |t| 1.3 * t.max(-0.4)).unwrap();
        let direct = pairing(&u, &ma_measure(&w).unwrap(), 1.0).unwrap();
        assert!((direct - 4.0 * volume_integral(&u)).abs() < 5e-3 * direct);
    }
}
