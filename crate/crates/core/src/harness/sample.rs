use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::planar::{
    energy_planar, ma_planar, mutual_energy_planar, random_planar_potential, PlanarGrid,
    PlanarPotential, RelaxationOptions,
};
use crate::radial::{
    energy_p, ma_measure, mutual_energy, pairing, random_potential, RadialGrid, RadialPotential,
    SamplerParams,
};

/// The functional calculus the inequality checks need, shared by both
/// representations.
pub trait Sample: Clone + Send + Sync {
    fn dimension(&self) -> usize;
    /// `∫ (-u)^p (dd^c u)^n`.
    fn energy(&self, p: f64) -> Result<f64>;
    /// `∫ (-u_0)^p dd^c u_1 ∧ … ∧ dd^c u_n`.
    fn mutual(u0: &Self, us: &[Self], p: f64) -> Result<f64>;
    /// `∫ (-self) (dd^c v)^n`.
    fn pair_with_ma(&self, v: &Self) -> Result<f64>;
    fn mass(&self) -> Result<f64>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn scale(&self, lambda: f64) -> Self;
    fn is_zero(&self) -> bool;
}

impl Sample for RadialPotential {
    fn dimension(&self) -> usize {
        self.n()
    }

    fn energy(&self, p: f64) -> Result<f64> {
        energy_p(self, p)
    }

    fn mutual(u0: &Self, us: &[Self], p: f64) -> Result<f64> {
        mutual_energy(u0, us, p)
    }

    fn pair_with_ma(&self, v: &Self) -> Result<f64> {
        pairing(self, &ma_measure(v)?, 1.0)
    }

    fn mass(&self) -> Result<f64> {
        Ok(ma_measure(self)?.total_mass())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.sum(other)
    }

    fn scale(&self, lambda: f64) -> Self {
        self.scaled(lambda)
    }

    fn is_zero(&self) -> bool {
        RadialPotential::is_zero(self)
    }
}

impl Sample for PlanarPotential {
    fn dimension(&self) -> usize {
        1
    }

    fn energy(&self, p: f64) -> Result<f64> {
        energy_planar(self, p)
    }

    fn mutual(u0: &Self, us: &[Self], p: f64) -> Result<f64> {
        let [u1] = us else {
            return Err(LabError::InvalidArgument(format!(
                "planar mutual energy takes one potential, got {}",
                us.len()
            )));
        };
        if p == 1.0 {
            return mutual_energy_planar(u0, u1);
        }
        let f = ma_planar(u1);
        let w = u0.grid().weights();
        Ok(u0
            .values()
            .iter()
            .zip(f.density())
            .zip(w)
            .map(|((v, d), w)| (-v).max(0.0).powf(p) * d * w)
            .sum())
    }

    fn pair_with_ma(&self, v: &Self) -> Result<f64> {
        mutual_energy_planar(self, v)
    }

    fn mass(&self) -> Result<f64> {
        Ok(ma_planar(self).total_mass())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.sum(other)
    }

    fn scale(&self, lambda: f64) -> Self {
        self.scaled(lambda)
    }

    fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }
}

/// Seeded tuples of potentials.
#[derive(Debug, Clone)]
pub struct SampleSet<S> {
    pub seed: u64,
    pub tuples: Vec<Vec<S>>,
}

impl<S: Sample> SampleSet<S> {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Appends `count` tuples whose members all equal the first member of
    /// an existing tuple (equality cases).
    pub fn with_diagonals(mut self, count: usize) -> Self {
        let size = self.tuples.first().map_or(0, Vec::len);
        let extra: Vec<Vec<S>> = self
            .tuples
            .iter()
            .take(count)
            .map(|t| vec![t[0].clone(); size])
            .collect();
        self.tuples.extend(extra);
        self
    }
}

/// Seed of member `j` in tuple `i`.
pub fn derive_seed(seed: u64, i: usize, j: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((i as u64).wrapping_mul(1_000_003))
        .wrapping_add(j as u64)
}

/// `count` tuples of `size` independent random radial potentials.
pub fn radial_tuples(
    grid: &Arc<RadialGrid>,
    size: usize,
    count: usize,
    seed: u64,
) -> SampleSet<RadialPotential> {
    let params = SamplerParams::default();
    let tuples = (0..count)
        .map(|i| {
            (0..size)
                .map(|j| random_potential(grid, derive_seed(seed, i, j), &params))
                .collect()
        })
        .collect();
    SampleSet { seed, tuples }
}

/// `count` tuples of `size` independent random planar potentials.
pub fn planar_tuples(
    grid: &Arc<PlanarGrid>,
    size: usize,
    count: usize,
    seed: u64,
    opts: &RelaxationOptions,
) -> Result<SampleSet<PlanarPotential>> {
    let tuples = (0..count)
        .into_par_iter()
        .map(|i| {
            (0..size)
                .map(|j| random_planar_potential(grid, derive_seed(seed, i, j), opts))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(SampleSet { seed, tuples })
}
