use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::solvers::{default_tol, Geometry, GridConfig};

/// Effective configuration of one run; every field has a default and the
/// whole struct is echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub n: usize,
    pub geometry: Geometry,
    pub grid: GridConfig,
    pub k: f64,
    pub k_list: Vec<f64>,
    pub eta: f64,
    /// `None` selects the geometry default.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub samples: usize,
    pub suite: String,
    /// Exponent `b` of the exponential-energy scan.
    pub b: f64,
    pub eps_list: Vec<f64>,
    pub levels: Vec<f64>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            n: 1,
            geometry: Geometry::Radial,
            grid: GridConfig::default(),
            k: 1.0,
            k_list: vec![0.5, 1.0, 1.5, 1.9],
            eta: 0.5,
            tol: None,
            max_iter: 5000,
            seed: 42,
            samples: 200,
            suite: "all".into(),
            b: 0.6,
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            levels: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            output: PathBuf::from("ma-lab-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            LabError::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| LabError::InvalidArgument(format!("bad config {}: {e}", path.display())))
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or_else(|| default_tol(self.geometry))
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.check_dimension(self.n)?;
        let bad = |what: &str| Err(LabError::InvalidArgument(what.to_string()));
        if self.grid.nodes < 3 || !(self.grid.t_min < 0.0) {
            return bad("radial grid needs at least 3 nodes and t_min < 0");
        }
        if self.grid.resolution < 16 {
            return bad("planar resolution must be at least 16");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta must lie in (0, 1]");
        }
        if !(self.tol() > 0.0) {
            return bad("tol must be positive");
        }
        if self.max_iter == 0 || self.samples == 0 {
            return bad("max_iter and samples must be positive");
        }
        if !(self.k >= 0.0 && self.k.is_finite())
            || self.k_list.iter().any(|k| !(*k >= 0.0 && k.is_finite()))
        {
            return bad("k values must be finite and nonnegative");
        }
        if !(self.b > 0.0) {
            return bad("b must be positive");
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) || self.levels.iter().any(|j| !(*j >= 0.0)) {
            return bad("mollifier widths must be positive and truncation levels nonnegative");
        }
        Ok(())
    }
}
