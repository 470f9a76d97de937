use super::field::{ensure_same_grid, PlanarDensity, PlanarPotential};
use crate::error::{LabError, Result};

/// `dd^c u` as a density w.r.t. `dV`: `(1/2π) Δu dA = (Δu/2) dV`.
pub fn ma_planar(u: &PlanarPotential) -> PlanarDensity {
    let lap = u.grid().laplacian(u.values());
    PlanarDensity::raw(u.grid().clone(), lap.into_iter().map(|l| 0.5 * l).collect())
}

/// `∫ (−u)^p dd^c u`.
pub fn energy_planar(u: &PlanarPotential, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "exponent p must be positive, got {p}"
        )));
    }
    Ok(pairing(u, &ma_planar(u), p))
}

/// `∫ (−u)^p f dV` for the grid part of `f`.
fn pairing(u: &PlanarPotential, f: &PlanarDensity, p: f64) -> f64 {
    let w = u.grid().weights();
    u.values()
        .iter()
        .zip(f.density())
        .zip(w)
        .map(|((v, d), w)| (-v).max(0.0).powf(p) * d * w)
        .sum()
}

/// `∫ (−u) dμ`, including circle atoms (read off the exact circle average of
/// `u` by interpolating between the nearest grid radii is not attempted: the
/// atom contributes `−u` at the nodes closest to the circle, averaged).
pub fn pairing_with_measure(u: &PlanarPotential, mu: &PlanarDensity) -> Result<f64> {
    ensure_same_grid(u.grid(), mu.grid())?;
    let mut total = pairing(u, mu, 1.0);
    let grid = u.grid();
    let h = grid.spacing();
    for a in mu.atoms() {
        let (mut acc, mut count) = (0.0, 0usize);
        for (k, v) in u.values().iter().enumerate() {
            if (grid.radius(k) - a.radius).abs() <= 0.5 * h {
                acc += -v;
                count += 1;
            }
        }
        if count == 0 {
            return Err(LabError::InvalidArgument(format!(
                "no nodes near circle r = {}",
                a.radius
            )));
        }
        total += a.mass * acc / count as f64;
    }
    Ok(total)
}

/// `∫ e^{−s u} dV`.
pub fn exp_integral_planar(u: &PlanarPotential, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "exponent s must be positive, got {s}"
        )));
    }
    let f: Vec<f64> = u.values().iter().map(|v| (-s * v).exp()).collect();
    Ok(u.grid().integrate(&f))
}

/// `∫ (−u_0) dd^c u_1`, symmetrized over the two orderings so that the
/// bilinear form is symmetric on the grid.
pub fn mutual_energy_planar(u0: &PlanarPotential, u1: &PlanarPotential) -> Result<f64> {
    ensure_same_grid(u0.grid(), u1.grid())?;
    Ok(0.5 * (pairing(u0, &ma_planar(u1), 1.0) + pairing(u1, &ma_planar(u0), 1.0)))
}

/// Discrete Dirichlet form `(1/2π) Σ |∇u|² · cell area`.
pub fn dirichlet_energy(u: &PlanarPotential) -> f64 {
    u.grid().dirichlet_form(u.values())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::planar::{radial_to_planar, PlanarGrid};
    use crate::radial::{RadialGrid, RadialPotential};

    #[test]
    fn quadratic_potential_functionals() {
        let g = Arc::new(PlanarGrid::new(96).unwrap());
        let u = PlanarPotential::from_fn(g.clone(), |x, y| x * x + y * y - 1.0);
        let mu = ma_planar(&u);
        for d in mu.density() {
            assert!((d - 2.0).abs() < 1e-8);
        }
        assert!((mu.total_mass() - 2.0).abs() < 1e-8);
        let e = energy_planar(&u, 1.0).unwrap();
        assert!((e - 1.0).abs() < 2e-3, "{e}");
        assert!((mutual_energy_planar(&u, &u).unwrap() - e).abs() < 1e-14);
        let d = dirichlet_energy(&u);
        assert!((d - 1.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn zero_potential() {
        let g = Arc::new(PlanarGrid::new(16).unwrap());
        let u = PlanarPotential::zero(g);
        assert_eq!(energy_planar(&u, 1.0).unwrap(), 0.0);
        assert!((exp_integral_planar(&u, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((exp_integral_planar(&u, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_potential_mass_concentrates() {
        let rg = RadialGrid::uniform(1, -20.0, 2001).unwrap();
        let ur = RadialPotential::truncated_log(&rg, 1.0, 0.5f64.ln()).unwrap();
        let mut masses = Vec::new();
        for res in [64, 128] {
            let g = Arc::new(PlanarGrid::new(res).unwrap());
            let u = radial_to_planar(&ur, &g).unwrap();
            let mu = ma_planar(&u);
            let outside: f64 = (0..g.interior_count())
                .filter(|&k| (g.radius(k) - 0.5).abs() > 2.0 * g.spacing())
                .map(|k| mu.density()[k].abs() * g.weights()[k])
                .sum();
            // log|z| is only harmonic up to the O(h²) truncation error
            assert!(outside < g.spacing().powi(2), "stray mass {outside}");
            masses.push(mu.total_mass());
        }
        assert!((masses[1] - 1.0).abs() < 0.02, "{masses:?}");
    }
}
