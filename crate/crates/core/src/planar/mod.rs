//! Full 2-D discretization of the `n = 1` case on the unit disk.

mod envelope;
mod field;
mod functionals;
mod grid;
mod mollify;
mod poisson;
mod sampler;

pub use envelope::{subharmonic_envelope, upper_envelope_seq};
pub use field::{radial_to_planar, CircleAtom, PlanarDensity, PlanarPotential, PlanarRecord};
pub use functionals::{
    dirichlet_energy, energy_planar, exp_integral_planar, ma_planar, mutual_energy_planar,
    pairing_with_measure,
};
pub use grid::{PlanarGrid, Stencil};
pub use mollify::mollify;
pub use poisson::{poisson_solve, RelaxationOptions};
pub use sampler::{random_density, random_planar_potential};
