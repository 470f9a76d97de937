//! Numerical laboratory for the complex Monge-Ampère equation
//! `(dd^c u)^n = k e^{-u} dV / ∫ e^{-u} dV` on the unit ball and for the
//! pluricomplex energy inequalities that surround it.
//!
//! Two discrete representations are provided:
//!
//! * [`radial`]: rotation-invariant potentials `u(z) = χ(log|z|)` on the unit
//!   ball of `C^n`, any `n ≥ 1`, stored as piecewise-linear profiles in the
//!   log-radius. Monge-Ampère measures, energies and exponential integrals are
//!   exact for the piecewise-linear interpolant.
//! * [`planar`]: full 2-D grids on the unit disk (`n = 1`), where
//!   `dd^c u = (1/2π) Δu dA`, discretized with a Shortley–Weller stencil.
//!
//! On top of these sit the [`solvers`] (fixed point, variational, approximation
//! and truncation schemes), the [`harness`] that evaluates every inequality on
//! sample families, and the [`cli`] batch front end.

// argument checks are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod planar;
pub mod radial;
pub mod report;
pub mod solvers;

pub use error::{LabError, Result};
