use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::report::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIter,
    Diverged,
    Oscillating,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIter => "max_iter",
            SolverStatus::Diverged => "diverged",
            SolverStatus::Oscillating => "oscillating",
        }
    }
}

/// One iteration of a solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual_sup: f64,
    pub residual_l1: f64,
    pub mass: f64,
    pub energy: f64,
    #[serde(rename = "F")]
    pub functional: f64,
    pub step: f64,
}

/// Metrics of the returned potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TraceSummary {
    pub residual_sup: f64,
    pub equation_residual: f64,
    pub mass: f64,
    pub energy: f64,
    #[serde(rename = "F")]
    pub functional: f64,
    pub sup_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace {
    pub status: SolverStatus,
    pub iterations: usize,
    pub summary: TraceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub rows: Vec<TraceRow>,
    /// Excluded from reports so that they stay reproducible.
    #[serde(skip)]
    pub wall_clock: Duration,
}

pub const TRACE_COLUMNS: &str = "iteration,residual_sup,residual_l1,mass,energy,F,step";

impl SolverTrace {
    pub fn residuals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual_sup).collect()
    }

    pub fn functionals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.functional).collect()
    }

    /// One comment line, one header line, one row per iteration.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# solver trace: status={} iterations={}; step is the sup-norm change of the iterate\n{TRACE_COLUMNS}\n",
            self.status.as_str(),
            self.iterations
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.iteration,
                fmt_f64(r.residual_sup),
                fmt_f64(r.residual_l1),
                fmt_f64(r.mass),
                fmt_f64(r.energy),
                fmt_f64(r.functional),
                fmt_f64(r.step)
            ));
        }
        out
    }
}
