//! Rotation-invariant potentials on the unit ball of `C^n`.

mod envelope;
mod grid;
mod ops;
mod potential;
mod sampler;

pub use envelope::envelope_p;
pub use grid::RadialGrid;
pub use ops::{
    dirichlet_solve, energy_p, exp_integral, log_exp_integral, ma_measure, mixed_ma, mutual_energy,
    pairing, volume_integral,
};
pub(crate) use potential::ensure_same_grid;
pub use potential::{RadialMeasure, RadialPotential, RadialRecord, TOL_CONVEX};
pub use sampler::{random_potential, SamplerParams};
