use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::potential::RadialPotential;

/// Shape parameters of the random potential sampler.
///
/// Potentials are built as a double cumulative sum: exponential increments
/// give nondecreasing slopes, and integrating the slopes from the boundary
/// gives a convex nondecreasing profile with `χ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Probability that an increment is zero (flat stretches).
    pub sparsity: f64,
    /// Probability that an increment is a spike (near-kink).
    pub kink_probability: f64,
    /// Multiplier applied to spike increments.
    pub kink_weight: f64,
    /// Final slope (total mass to the power `1/n`) is uniform in this range.
    pub slope_range: (f64, f64),
    /// Onset of curvature, uniform in this log-radius range (clamped to the grid).
    pub onset_range: (f64, f64),
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            sparsity: 0.3,
            kink_probability: 0.01,
            kink_weight: 50.0,
            slope_range: (0.2, 3.0),
            onset_range: (-8.0, -0.25),
        }
    }
}

/// Deterministic random potential for the given seed.
pub fn random_potential(
    grid: &Arc<RadialGrid>,
    seed: u64,
    params: &SamplerParams,
) -> RadialPotential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = grid.nodes();
    let last = grid.last();
    let lo = params.onset_range.0.max(grid.t_min());
    let hi = params.onset_range.1.max(lo);
    let onset = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let target = rng.gen_range(params.slope_range.0..=params.slope_range.1);

    // increments[i] is the slope jump at node i (i < M)
    let mut increments = vec![0.0; last];
    for (i, inc) in increments.iter_mut().enumerate() {
        let draw: f64 = rng.sample(Exp1);
        let u: f64 = rng.gen();
        if nodes[i] < onset || u < params.sparsity {
            continue;
        }
        *inc = if u > 1.0 - params.kink_probability {
            draw * params.kink_weight
        } else {
            draw
        };
    }
    if increments.iter().all(|&x| x == 0.0) {
        increments[last - 1] = 1.0;
    }
    let total: f64 = increments.iter().sum();
    let mut slope = 0.0;
    let mut chi = vec![0.0; grid.len()];
    let mut slopes = vec![0.0; grid.len()];
    for i in 1..=last {
        slope += increments[i - 1] * target / total;
        slopes[i] = slope;
    }
    for i in (1..=last).rev() {
        chi[i - 1] = chi[i] - grid.spacing(i) * slopes[i];
    }
    RadialPotential::new_unchecked(grid.clone(), chi).expect("length matches grid")
}
