//! Constructive procedures: the damped fixed point for the mean-field
//! equation, variational descent on `F = e/(n+1) + J`, and the
//! approximation and truncation schemes for general measures.

mod fixed_point;
mod model;
mod schemes;
mod trace;
mod variational;

pub use fixed_point::{
    default_tol, fixed_point_solve, fixed_point_solve_from, k_scan, FixedPointConfig, Initializer,
    KScan, KScanRow,
};
pub use model::{
    apply_t, equation_residual, euler_lagrange_residual, Geometry, GridConfig, Solution,
};
pub(crate) use schemes::least_squares_slope;
pub use schemes::{
    approximation_scheme, truncation_scheme, ApproximationOutcome, SchemeStep, TruncationOutcome,
    ENERGY_MONOTONE_TOL,
};
pub use trace::{SolverStatus, SolverTrace, TraceRow, TraceSummary, TRACE_COLUMNS};
pub use variational::{
    directional_derivative_check, free_energy, free_energy_gradient, variational_solve,
    variational_solve_from, DirectionalReport, VariationalConfig, VariationalStart,
};
