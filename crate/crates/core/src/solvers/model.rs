use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::planar::{
    energy_planar, ma_planar, poisson_solve, subharmonic_envelope, PlanarDensity, PlanarGrid,
    PlanarPotential, RelaxationOptions,
};
use crate::radial::{
    dirichlet_solve, energy_p, envelope_p, ma_measure, RadialGrid, RadialMeasure, RadialPotential,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Radial,
    PlanarDisk,
}

impl Geometry {
    pub fn as_str(&self) -> &'static str {
        match self {
            Geometry::Radial => "radial",
            Geometry::PlanarDisk => "planar-disk",
        }
    }

    /// Planar grids only discretize `n = 1`.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        match (self, n) {
            (_, 0) => Err(LabError::InvalidArgument(
                "dimension n must be at least 1".into(),
            )),
            (Geometry::PlanarDisk, n) if n != 1 => Err(LabError::Unsupported(format!(
                "planar-disk geometry needs n = 1, got n = {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Geometry {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radial" => Ok(Geometry::Radial),
            "planar-disk" | "planar" => Ok(Geometry::PlanarDisk),
            other => Err(LabError::InvalidArgument(format!(
                "unknown geometry {other:?}"
            ))),
        }
    }
}

/// Discretization parameters for both geometries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub t_min: f64,
    pub nodes: usize,
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_min: -20.0,
            nodes: 2001,
            resolution: 64,
        }
    }
}

impl GridConfig {
    pub fn radial(&self, n: usize) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::uniform(n, self.t_min, self.nodes)?))
    }

    pub fn planar(&self) -> Result<Arc<PlanarGrid>> {
        Ok(Arc::new(PlanarGrid::new(self.resolution)?))
    }

    pub fn zero(&self, geometry: Geometry, n: usize) -> Result<Solution> {
        geometry.check_dimension(n)?;
        Ok(match geometry {
            Geometry::Radial => Solution::Radial(RadialPotential::zero(self.radial(n)?)),
            Geometry::PlanarDisk => Solution::Planar(PlanarPotential::zero(self.planar()?)),
        })
    }
}

/// A potential in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Radial(RadialPotential),
    Planar(PlanarPotential),
}

fn planar_opts() -> RelaxationOptions {
    RelaxationOptions::default()
}

impl Solution {
    pub fn geometry(&self) -> Geometry {
        match self {
            Solution::Radial(_) => Geometry::Radial,
            Solution::Planar(_) => Geometry::PlanarDisk,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Solution::Radial(u) => u.n(),
            Solution::Planar(_) => 1,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialPotential> {
        match self {
            Solution::Radial(u) => Some(u),
            Solution::Planar(_) => None,
        }
    }

    pub fn as_planar(&self) -> Option<&PlanarPotential> {
        match self {
            Solution::Planar(u) => Some(u),
            Solution::Radial(_) => None,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Solution::Radial(u) => u.values(),
            Solution::Planar(u) => u.values(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Sup-norm distance; `∞` across representations.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        match (self, other) {
            (Solution::Radial(a), Solution::Radial(b)) if a.grid().same_as(b.grid()) => {
                a.sup_distance(b)
            }
            (Solution::Planar(a), Solution::Planar(b))
                if a.grid().resolution() == b.grid().resolution() =>
            {
                a.sup_distance(b)
            }
            _ => f64::INFINITY,
        }
    }

    /// `∫ |u - v| dV` with the nodal quadrature weights.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        if self.sup_distance(other).is_infinite() {
            return f64::INFINITY;
        }
        let w = self.volume_weights();
        self.values()
            .iter()
            .zip(other.values())
            .zip(&w)
            .map(|((a, b), w)| (a - b).abs() * w)
            .sum()
    }

    fn volume_weights(&self) -> Vec<f64> {
        match self {
            Solution::Radial(u) => u.grid().cell_volumes(),
            Solution::Planar(u) => u.grid().weights().to_vec(),
        }
    }

    /// Total Monge-Ampère mass.
    pub fn mass(&self) -> Result<f64> {
        match self {
            Solution::Radial(u) => Ok(ma_measure(u)?.total_mass()),
            Solution::Planar(u) => Ok(ma_planar(u).total_mass()),
        }
    }

    /// Energy `e(u) = ∫ (-u) (dd^c u)^n`.
    pub fn energy(&self) -> Result<f64> {
        match self {
            Solution::Radial(u) => energy_p(u, 1.0),
            Solution::Planar(u) => energy_planar(u, 1.0),
        }
    }

    /// `ln ∫ e^{-u} dV` with the nodal quadrature used by the solvers.
    pub fn log_partition(&self) -> f64 {
        exp_weights(self.values(), &self.volume_weights()).1
    }

    /// `F(u) = e(u)/(n+1) - ln ∫ e^{-u} dV`.
    pub fn functional(&self) -> Result<f64> {
        Ok(self.energy()? / (self.n() + 1) as f64 - self.log_partition())
    }

    pub fn grid_hash(&self) -> String {
        match self {
            Solution::Radial(u) => u.grid().hash_hex(),
            Solution::Planar(u) => u.grid().mask_hash(),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Solution::Radial(u) => u.to_csv(),
            Solution::Planar(u) => u.to_csv(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        match self {
            Solution::Radial(u) => serde_json::to_value(u.to_record()),
            Solution::Planar(u) => serde_json::to_value(u.to_record()),
        }
        .unwrap_or(serde_json::Value::Null)
    }
}

/// Normalized nodal weights `e^{-u_i} w_i / Σ_j e^{-u_j} w_j` and the log of
/// the normalizer, computed with a shift so that nothing overflows.
pub(crate) fn exp_weights(values: &[f64], weights: &[f64]) -> (Vec<f64>, f64) {
    let shift = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(u, _)| -u)
        .fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = values
        .iter()
        .zip(weights)
        .map(|(u, w)| {
            if *w > 0.0 {
                (-u - shift).exp() * w
            } else {
                0.0
            }
        })
        .collect();
    let z: f64 = raw.iter().sum();
    (raw.into_iter().map(|q| q / z).collect(), shift + z.ln())
}

/// `T(u)`: the zero-boundary solution of
/// `(dd^c T(u))^n = k e^{-u} dV / ∫ e^{-u} dV`. Its total mass is `k`.
pub fn apply_t(u: &Solution, k: f64) -> Result<Solution> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "k must be finite and nonnegative, got {k}"
        )));
    }
    if u.values().iter().any(|v| !v.is_finite()) {
        return Err(LabError::InvalidArgument(
            "apply_t on a non-finite potential".into(),
        ));
    }
    match u {
        Solution::Radial(u) => {
            let (p, _) = exp_weights(u.values(), &u.grid().cell_volumes());
            let masses: Vec<f64> = p.iter().map(|x| k * x).collect();
            let mu = RadialMeasure::from_node_masses(u.grid().clone(), &masses)?;
            Ok(Solution::Radial(dirichlet_solve(&mu)?))
        }
        Solution::Planar(u) => {
            let grid = u.grid();
            let (p, _) = exp_weights(u.values(), grid.weights());
            let density = p
                .iter()
                .zip(grid.weights())
                .map(|(x, w)| if *w > 0.0 { k * x / w } else { 0.0 })
                .collect();
            let mu = PlanarDensity::new(grid.clone(), density, Vec::new())?;
            Ok(Solution::Planar(poisson_solve(&mu, &planar_opts())?))
        }
    }
}

/// `P((1 - η) u + η v)`.
pub(crate) fn relax(u: &Solution, v: &Solution, eta: f64) -> Result<Solution> {
    let blend: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (1.0 - eta) * a + eta * b)
        .collect();
    match u {
        Solution::Radial(u) => Ok(Solution::Radial(envelope_p(u.grid(), &blend)?)),
        Solution::Planar(u) => Ok(Solution::Planar(subharmonic_envelope(
            u.grid(),
            &blend,
            &planar_opts(),
        )?)),
    }
}

/// Total variation between `(dd^c u)^n` and `k e^{-u} dV / ∫ e^{-u} dV`,
/// divided by `k` (by 1 when `k = 0`).
pub fn equation_residual(u: &Solution, k: f64) -> Result<f64> {
    let tv = match u {
        Solution::Radial(r) => {
            let (p, _) = exp_weights(r.values(), &r.grid().cell_volumes());
            let masses = ma_measure(r)?.node_masses();
            masses
                .iter()
                .zip(&p)
                .map(|(m, q)| (m - k * q).abs())
                .sum::<f64>()
        }
        Solution::Planar(pl) => {
            let grid = pl.grid();
            let (p, _) = exp_weights(pl.values(), grid.weights());
            let f = ma_planar(pl);
            f.density()
                .iter()
                .zip(grid.weights())
                .zip(&p)
                .map(|((d, w), q)| (d * w - k * q).abs())
                .sum()
        }
    };
    Ok(if k > 0.0 { tv / k } else { tv })
}

/// Residual of the `k = 1` equation
/// `-(dd^c u)^n + e^{-u} dV / ∫ e^{-u} dV = 0`, as a total variation.
pub fn euler_lagrange_residual(u: &Solution) -> Result<f64> {
    equation_residual(u, 1.0)
}
