use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{PlanarDensity, PlanarPotential};
use super::grid::PlanarGrid;
use super::poisson::{poisson_solve, RelaxationOptions};
use crate::error::Result;

/// Random smooth nonnegative density: one to four compact bumps
/// `(1 − |z − c|²/w²)₊²` with random centers, widths and masses.
pub fn random_density(grid: &Arc<PlanarGrid>, seed: u64) -> Result<PlanarDensity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let r = rng.gen_range(0.0..0.6f64).sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let width = rng.gen_range(0.15..0.45);
            let height = rng.gen_range(0.5..6.0);
            (r * a.cos(), r * a.sin(), width, height)
        })
        .collect();
    PlanarDensity::from_fn(grid.clone(), |x, y| {
        bumps
            .iter()
            .map(|&(cx, cy, w, amp)| {
                let s = 1.0 - ((x - cx).powi(2) + (y - cy).powi(2)) / (w * w);
                amp * s.max(0.0).powi(2)
            })
            .sum()
    })
}

/// Potential of [`random_density`] for the same seed.
pub fn random_planar_potential(
    grid: &Arc<PlanarGrid>,
    seed: u64,
    opts: &RelaxationOptions,
) -> Result<PlanarPotential> {
    poisson_solve(&random_density(grid, seed)?, opts)
}
