//! Evaluation of the energy, mass and exponential inequalities on seeded
//! sample families, with one machine-readable report per inequality.

mod checks;
mod exponential;
mod probes;
mod report;
mod sample;

pub use checks::{check_energy_holder, check_mass_holder, check_subadditivity, SubadditivityMode};
pub use exponential::{
    check_exp_energy, check_exp_mass, exp_energy_log_ratio, truncated_log_family, ExpEnergyScan,
    ExpMassScan, Range, ScanPoint, STABILITY_TOL,
};
pub use probes::{
    estimate_m1_constant, l1_convergence_probe, stability_probe, L1Report, L1Row, M1Estimate,
    StabilityPoint, StabilityReport,
};
pub use report::{InequalityReport, HOMOGENEITY_SCALES, TOL_CLOSED_FORM, TOL_GRID};
pub use sample::{derive_seed, planar_tuples, radial_tuples, Sample, SampleSet};
