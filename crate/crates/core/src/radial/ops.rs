//! Exact-quadrature calculus for radial potentials.
//!
//! For `u(z) = χ(log|z|)` with `χ` convex and nondecreasing, the Monge-Ampère
//! measure of the ball `{log|z| ≤ t}` is `χ'(t+)^n` under the normalization
//! `dd^c = (i/π)∂∂̄`. A piecewise-linear `χ` therefore has an atomic
//! Monge-Ampère measure sitting on the kinks: node `i` carries
//! `s_{i+1}^n - s_i^n`, where `s_i` is the slope of segment `i` and the
//! segment below `t_min` is flat. All operations here are exact for that
//! interpolant.

use std::sync::Arc;

use super::grid::RadialGrid;
use super::potential::{ensure_same_grid, RadialMeasure, RadialPotential, TOL_CONVEX};
use crate::error::{LabError, Result};

fn cumulative_from_slopes(
    grid: &Arc<RadialGrid>,
    slope_products: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let last = grid.last();
    (0..=last)
        .map(|i| slope_products((i + 1).min(last)))
        .collect()
}

/// `(dd^c u)^n` as cumulative masses `G(t_i) = s_{i+1}^n`, with
/// `G(t_M) = s_M^n` the total mass.
pub fn ma_measure(u: &RadialPotential) -> Result<RadialMeasure> {
    u.validate(TOL_CONVEX)?;
    let n = u.n() as i32;
    let g = cumulative_from_slopes(u.grid(), |j| u.slope(j).max(0.0).powi(n));
    RadialMeasure::from_cumulative(u.grid().clone(), monotone(g))
}

/// `dd^c u_1 ∧ … ∧ dd^c u_n`, cumulative masses `∏_j s^{(j)}_{i+1}`.
pub fn mixed_ma(us: &[RadialPotential]) -> Result<RadialMeasure> {
    let first = us
        .first()
        .ok_or_else(|| LabError::InvalidArgument("empty potential list".into()))?;
    let n = first.n();
    if us.len() != n {
        return Err(LabError::InvalidArgument(format!(
            "mixed Monge-Ampère in dimension {n} needs {n} potentials, got {}",
            us.len()
        )));
    }
    for u in us {
        ensure_same_grid(first.grid(), u.grid())?;
        u.validate(TOL_CONVEX)?;
    }
    let g = cumulative_from_slopes(first.grid(), |j| {
        us.iter().map(|u| u.slope(j).max(0.0)).product()
    });
    RadialMeasure::from_cumulative(first.grid().clone(), monotone(g))
}

// Rounding in the slopes can make the product sequence dip by an ulp.
fn monotone(mut g: Vec<f64>) -> Vec<f64> {
    for i in 1..g.len() {
        if g[i] < g[i - 1] {
            g[i] = g[i - 1];
        }
    }
    g
}

/// Radial Dirichlet problem `(dd^c u)^n = μ`, `u = 0` on the sphere:
/// `χ(t) = -∫_t^0 G(s)^{1/n} ds`, with `G` constant on each segment and equal
/// to its value at the left node.
pub fn dirichlet_solve(mu: &RadialMeasure) -> Result<RadialPotential> {
    let grid = mu.grid();
    let g = mu.cumulative();
    if let Some(node) = g.iter().position(|&x| x < 0.0) {
        return Err(LabError::NegativeMeasure {
            node,
            value: g[node],
        });
    }
    let last = grid.last();
    let scale = mu.total_mass().max(1.0);
    if g[last] - g[last - 1] > 1e-12 * scale {
        return Err(LabError::InvalidArgument(format!(
            "measure charges the boundary sphere (mass {:e}); zero boundary values are impossible",
            g[last] - g[last - 1]
        )));
    }
    let inv_n = 1.0 / grid.n() as f64;
    let mut chi = vec![0.0; grid.len()];
    for i in (1..=last).rev() {
        let slope = g[i - 1].powf(inv_n);
        chi[i - 1] = chi[i] - grid.spacing(i) * slope;
    }
    RadialPotential::new(grid.clone(), chi)
}

/// `∫ (-u)^p (dd^c u)^n`.
pub fn energy_p(u: &RadialPotential, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let mu = ma_measure(u)?;
    Ok(stieltjes(u, &mu, p))
}

/// `∫ (-u_0)^p dd^c u_1 ∧ … ∧ dd^c u_n`.
pub fn mutual_energy(u0: &RadialPotential, us: &[RadialPotential], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let mu = mixed_ma(us)?;
    ensure_same_grid(u0.grid(), mu.grid())?;
    u0.validate(TOL_CONVEX)?;
    Ok(stieltjes(u0, &mu, p))
}

/// `∫ (-u)^p dμ` summed over the node masses of `μ`.
pub fn pairing(u: &RadialPotential, mu: &RadialMeasure, p: f64) -> Result<f64> {
    check_exponent(p)?;
    ensure_same_grid(u.grid(), mu.grid())?;
    Ok(stieltjes(u, mu, p))
}

fn stieltjes(u: &RadialPotential, mu: &RadialMeasure, p: f64) -> f64 {
    mu.node_masses()
        .iter()
        .zip(u.values())
        .filter(|(m, _)| **m > 0.0)
        .map(|(m, &x)| m * (-x).max(0.0).powf(p))
        .sum()
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "exponent p must be positive, got {p}"
        )))
    }
}

/// `ln(expm1(x)/x)`, stable for every real `x`.
pub(crate) fn ln_exprel(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        x / 2.0
    } else if x > 30.0 {
        x - x.ln() + (-(-x).exp()).ln_1p()
    } else if x > 0.0 {
        (x.exp_m1() / x).ln()
    } else {
        // expm1(x)/x = (1 - e^x)/(-x) for x < 0
        ((-x.exp_m1()) / (-x)).ln()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln ∫ e^{-sχ} dV` for the piecewise-linear profile, exact segment by
/// segment, plus the flat tail below `t_min`.
pub fn log_exp_integral(u: &RadialPotential, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "exponent s must be positive, got {s}"
        )));
    }
    let grid = u.grid();
    let two_n = 2.0 * grid.n() as f64;
    let nodes = grid.nodes();
    let chi = u.values();
    let mut terms = Vec::with_capacity(grid.len());
    // tail: e^{-sχ_0} · V({t ≤ t_0})
    terms.push(-s * chi[0] + two_n * nodes[0]);
    for i in 1..grid.len() {
        let len = grid.spacing(i);
        let rate = two_n - s * u.slope(i);
        // ∫_a^b 2n e^{-s(χ_a + σ(t-a)) + 2nt} dt = 2n e^{-sχ_a + 2na} · L · exprel(rate·L)
        terms.push(
            two_n.ln() - s * chi[i - 1] + two_n * nodes[i - 1] + len.ln() + ln_exprel(rate * len),
        );
    }
    Ok(log_sum_exp(&terms))
}

/// `∫ e^{-sχ} dV`, normalized so that the zero potential gives 1.
pub fn exp_integral(u: &RadialPotential, s: f64) -> Result<f64> {
    Ok(log_exp_integral(u, s)?.exp())
}

/// `∫ (-u) dV`, exact for the piecewise-linear profile.
pub fn volume_integral(u: &RadialPotential) -> f64 {
    let grid = u.grid();
    let two_n = 2.0 * grid.n() as f64;
    let nodes = grid.nodes();
    let chi = u.values();
    let mut total = -chi[0] * grid.ball_volume(nodes[0]);
    for i in 1..grid.len() {
        let (a, b) = (nodes[i - 1], nodes[i]);
        let len = b - a;
        let vb = grid.ball_volume(b);
        // V(b) - V(a) without cancellation
        let dv = -vb * (-two_n * len).exp_m1();
        // ∫_a^b (t - a) 2n e^{2nt} dt
        let ramp = len * vb - dv / two_n;
        total -= chi[i - 1] * dv + u.slope(i) * ramp;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::uniform(n, -20.0, 2001).unwrap()
    }

    #[test]
    fn volume_integral_closed_forms() {
        // u = |z|^2 - 1 in C^1: ∫ (1 - r^2) 2r dr = 1/2
        let g = Arc::new(grid(1));
        let u = RadialPotential::from_fn(g, |t| (2.0 * t).exp() - 1.0).unwrap();
        assert!((volume_integral(&u) - 0.5).abs() < 1e-4);
        // u = m max(t, c) against midpoint quadrature
        for n in 1..=3 {
            let (m, c) = (1.7, -0.8);
            let u = RadialPotential::truncated_log(
                &RadialGrid::from_nodes(n, vec![-3.0, -2.0, 0.0]).unwrap(),
                m,
                c,
            )
            .unwrap();
            let two_n = 2.0 * n as f64;
            let steps = 200_000;
            let mut brute = -m * c * (two_n * c).exp();
            for k in 0..steps {
                let t = c * (1.0 - (k as f64 + 0.5) / steps as f64);
                brute += -m * t * two_n * (two_n * t).exp() * (-c / steps as f64);
            }
            assert!((volume_integral(&u) - brute).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn unit_circle_mass_for_truncated_log() {
        let u = RadialPotential::truncated_log(&grid(1), 1.0, -1.0).unwrap();
        let mu = ma_measure(&u).unwrap();
        for (t, g) in u.grid().nodes().iter().zip(mu.cumulative()) {
            let expected = if *t >= -1.0 { 1.0 } else { 0.0 };
            assert!((g - expected).abs() < 1e-12, "t = {t}, G = {g}");
        }
    }

    #[test]
    fn normalization_anchor_every_dimension() {
        for n in 1..=4 {
            for c in [-0.1, -1.0, -7.3] {
                let u = RadialPotential::truncated_log(&grid(n), 1.0, c).unwrap();
                let mass = ma_measure(&u).unwrap().total_mass();
                assert!((mass - 1.0).abs() < 1e-12, "n = {n}, c = {c}: {mass}");
            }
        }
    }

    #[test]
    fn zero_potential_has_zero_measure() {
        let u = RadialPotential::zero(Arc::new(grid(3)));
        assert_eq!(ma_measure(&u).unwrap().total_mass(), 0.0);
        assert_eq!(energy_p(&u, 1.0).unwrap(), 0.0);
        assert_eq!(energy_p(&u, 2.5).unwrap(), 0.0);
        assert!((exp_integral(&u, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((exp_integral(&u, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_potential_in_c2() {
        let g = Arc::new(grid(2));
        let u = RadialPotential::from_fn(g, |t| (2.0 * t).exp() - 1.0).unwrap();
        let mu = ma_measure(&u).unwrap();
        // the boundary slope is a one-sided difference: first order in h
        assert!((mu.total_mass() - 4.0).abs() < 8.0 * u.grid().max_spacing());
        for (t, gv) in u.grid().nodes().iter().zip(mu.cumulative()).step_by(97) {
            let exact = 4.0 * (4.0 * t).exp();
            assert!(
                (gv - exact).abs() < 0.05 * exact.max(1e-12) + 1e-9,
                "t = {t}"
            );
        }
    }

    #[test]
    fn mixed_ma_product_of_slopes() {
        let base = grid(2).with_breakpoints(&[-1.5]).unwrap();
        let g = Arc::new(base);
        let u1 = RadialPotential::from_fn(g.clone(), |t| (2.0 * t).exp() - 1.0).unwrap();
        let u2 = RadialPotential::from_fn(g.clone(), |t| t.max(-1.5)).unwrap();
        let mixed = mixed_ma(&[u1.clone(), u2.clone()]).unwrap();
        let swapped = mixed_ma(&[u2.clone(), u1.clone()]).unwrap();
        assert_eq!(mixed, swapped);
        for (t, gv) in g.nodes().iter().zip(mixed.cumulative()).step_by(53) {
            let exact = if *t >= -1.5 {
                2.0 * (2.0 * t).exp()
            } else {
                0.0
            };
            assert!(
                (gv - exact).abs() < 0.03 * exact + 1e-12,
                "t = {t}: {gv} vs {exact}"
            );
        }
        assert_eq!(
            mixed_ma(&[u1.clone(), u1.clone()]).unwrap(),
            ma_measure(&u1).unwrap()
        );
    }

    #[test]
    fn mixed_ma_errors() {
        let g = Arc::new(grid(2));
        let u = RadialPotential::zero(g);
        assert!(mixed_ma(&[u.clone()]).is_err());
        let other = RadialPotential::zero(Arc::new(RadialGrid::uniform(2, -10.0, 11).unwrap()));
        assert!(matches!(
            mixed_ma(&[u, other]),
            Err(LabError::GridMismatch(_))
        ));
    }

    #[test]
    fn dirichlet_of_sphere_mass_is_truncated_log() {
        let g = Arc::new(grid(1).with_breakpoints(&[0.5f64.ln()]).unwrap());
        let mu = RadialMeasure::sphere_mass(g.clone(), 0.5f64.ln(), 1.0).unwrap();
        let u = dirichlet_solve(&mu).unwrap();
        for (t, x) in g.nodes().iter().zip(u.values()) {
            assert!((x - t.max(0.5f64.ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_of_uniform_density() {
        let g = Arc::new(grid(1));
        let mu = RadialMeasure::from_volume_density(g, |_| 2.0).unwrap();
        let u = dirichlet_solve(&mu).unwrap();
        let err = u
            .grid()
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(t, x)| (x - ((2.0 * t).exp() - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 3.0 * u.grid().max_spacing().powi(2), "{err}");
        assert!((ma_measure(&u).unwrap().total_mass() - 2.0).abs() < 1e-12);
        let zero = dirichlet_solve(&RadialMeasure::zero(u.grid().clone())).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn dirichlet_rejects_boundary_mass() {
        let g = Arc::new(RadialGrid::uniform(1, -2.0, 5).unwrap());
        let mu = RadialMeasure::from_cumulative(g, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(dirichlet_solve(&mu).is_err());
    }

    #[test]
    fn energy_of_truncated_log_family() {
        for n in 1..=3 {
            for (m, c) in [(1.0, -1.0), (2.5, -0.3), (0.7, -12.0)] {
                let u = RadialPotential::truncated_log(&grid(n), m, c).unwrap();
                let e = energy_p(&u, 1.0).unwrap();
                let exact = m.powi(n as i32 + 1) * c.abs();
                assert!(
                    (e - exact).abs() < 1e-12 * exact,
                    "n={n} m={m} c={c}: {e} vs {exact}"
                );
            }
        }
        let u = RadialPotential::zero(Arc::new(grid(1)));
        assert!(energy_p(&u, 0.0).is_err());
    }

    #[test]
    fn energy_of_quadratic_in_c1() {
        let u = RadialPotential::from_fn(Arc::new(grid(1)), |t| (2.0 * t).exp() - 1.0).unwrap();
        let e = energy_p(&u, 1.0).unwrap();
        assert!((e - 1.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn mutual_energy_closed_form() {
        // n = 1: ∫ -max(t,c) · 4e^{2t} dt = 2|c|e^{2c} + ∫_c^0 -4t e^{2t} dt
        let c = -1.0f64;
        let g = Arc::new(grid(1).with_breakpoints(&[c]).unwrap());
        let u0 = RadialPotential::from_fn(g.clone(), |t| t.max(c)).unwrap();
        let u1 = RadialPotential::from_fn(g.clone(), |t| (2.0 * t).exp() - 1.0).unwrap();
        let value = mutual_energy(&u0, &[u1.clone()], 1.0).unwrap();
        let exact = 2.0 * c.abs() * (2.0 * c).exp() + 1.0 - (1.0 - 2.0 * c) * (2.0 * c).exp();
        assert!((value - exact).abs() < 1e-4, "{value} vs {exact}");
        let scaled = mutual_energy(&u0.scaled(3.0), &[u1.clone()], 2.0).unwrap();
        let base = mutual_energy(&u0, &[u1.clone()], 2.0).unwrap();
        assert!((scaled - 9.0 * base).abs() < 1e-12 * scaled);
        let diag = mutual_energy(&u1, &[u1.clone()], 1.0).unwrap();
        assert!((diag - energy_p(&u1, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn exp_integral_closed_forms() {
        for c in [-0.5, -3.0, -15.0] {
            let u = RadialPotential::truncated_log(&grid(1), 1.0, c).unwrap();
            let v = exp_integral(&u, 1.0).unwrap();
            assert!((v - (2.0 - c.exp())).abs() < 1e-12, "c = {c}");
            let u4 = RadialPotential::truncated_log(&grid(1), 4.0, c).unwrap();
            let v4 = exp_integral(&u4, 1.0).unwrap();
            let exact = 2.0 * (-2.0 * c).exp() - 1.0;
            assert!(
                (v4 - exact).abs() < 1e-12 * exact,
                "c = {c}: {v4} vs {exact}"
            );
        }
    }

    #[test]
    fn ln_exprel_is_continuous() {
        for x in [-50.0, -1.0, -1e-9, 0.0, 1e-9, 1.0, 29.9, 30.1, 500.0] {
            let direct = if x == 0.0 {
                0.0
            } else {
                ((x as f64).exp_m1() / x).ln()
            };
            if direct.is_finite() {
                assert!(
                    (ln_exprel(x) - direct).abs() < 1e-12 * direct.abs().max(1.0),
                    "x = {x}"
                );
            }
        }
    }
}
