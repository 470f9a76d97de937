use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::PlanarGrid;
use crate::error::{LabError, Result};
use crate::radial::RadialPotential;

/// Subharmonic function on the unit disk with zero boundary values, stored at
/// the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPotential {
    grid: Arc<PlanarGrid>,
    values: Vec<f64>,
}

impl PlanarPotential {
    pub fn new(grid: Arc<PlanarGrid>, values: Vec<f64>) -> Result<Self> {
        let u = Self::new_unchecked(grid, values)?;
        u.validate(1e-8)?;
        Ok(u)
    }

    pub fn new_unchecked(grid: Arc<PlanarGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.interior_count() {
            return Err(LabError::GridMismatch(format!(
                "{} values for {} interior nodes",
                values.len(),
                grid.interior_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: Arc<PlanarGrid>) -> Self {
        let values = vec![0.0; grid.interior_count()];
        Self { grid, values }
    }

    /// Samples `f(x, y)` at the interior nodes without validation.
    pub fn from_fn(grid: Arc<PlanarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.interior_count())
            .map(|k| {
                let (x, y) = grid.point(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<PlanarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Nonpositivity and discrete subharmonicity, both up to `tol` relative
    /// to the size of the data.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let violation = |k: usize, what: String| LabError::InvariantViolation {
            node: k,
            t: self.grid.radius(k),
            what,
        };
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(violation(k, "non-finite value".into()));
        }
        let scale = self.sup_norm().max(1.0);
        if let Some(k) = self.values.iter().position(|&v| v > tol * scale) {
            return Err(violation(k, format!("positive value {}", self.values[k])));
        }
        let lap = self.grid.laplacian(&self.values);
        let lap_scale = lap.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if let Some(k) = lap.iter().position(|&l| l < -tol * lap_scale) {
            return Err(violation(
                k,
                format!("negative discrete Laplacian {:e}", lap[k]),
            ));
        }
        Ok(())
    }
}

/// Circle measure: `mass` spread uniformly over `|z| = radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleAtom {
    pub radius: f64,
    pub mass: f64,
}

/// Positive measure on the disk: a grid density w.r.t. normalized area
/// `dV = dA/π` plus circle atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDensity {
    grid: Arc<PlanarGrid>,
    density: Vec<f64>,
    atoms: Vec<CircleAtom>,
}

impl PlanarDensity {
    pub fn new(grid: Arc<PlanarGrid>, density: Vec<f64>, atoms: Vec<CircleAtom>) -> Result<Self> {
        if density.len() != grid.interior_count() {
            return Err(LabError::GridMismatch(format!(
                "{} density values for {} interior nodes",
                density.len(),
                grid.interior_count()
            )));
        }
        if let Some(node) = density.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(LabError::NegativeMeasure {
                node,
                value: density[node],
            });
        }
        for a in &atoms {
            if !(a.radius > 0.0 && a.radius < 1.0 && a.mass > 0.0 && a.mass.is_finite()) {
                return Err(LabError::InvalidArgument(format!(
                    "circle atom needs radius in (0,1) and positive mass, got {a:?}"
                )));
            }
        }
        Ok(Self {
            grid,
            density,
            atoms,
        })
    }

    /// Density values from `f(x, y)`, no atoms.
    pub fn from_fn(grid: Arc<PlanarGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let density = (0..grid.interior_count())
            .map(|k| {
                let (x, y) = grid.point(k);
                f(x, y)
            })
            .collect();
        Self::new(grid, density, Vec::new())
    }

    pub fn zero(grid: Arc<PlanarGrid>) -> Self {
        let density = vec![0.0; grid.interior_count()];
        Self {
            grid,
            density,
            atoms: Vec::new(),
        }
    }

    pub fn circle(grid: Arc<PlanarGrid>, radius: f64, mass: f64) -> Result<Self> {
        let density = vec![0.0; grid.interior_count()];
        Self::new(grid, density, vec![CircleAtom { radius, mass }])
    }

    /// Density without validation; negative entries are allowed (used for
    /// residual measures such as `ma_planar` of rounding-level noise).
    pub(crate) fn raw(grid: Arc<PlanarGrid>, density: Vec<f64>) -> Self {
        Self {
            grid,
            density,
            atoms: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Arc<PlanarGrid> {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn atoms(&self) -> &[CircleAtom] {
        &self.atoms
    }

    pub fn grid_mass(&self) -> f64 {
        self.grid.integrate(&self.density)
    }

    pub fn total_mass(&self) -> f64 {
        self.grid_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.iter().all(|&v| v == 0.0)
    }

    /// `L²(dV)` distance between the grid parts.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let sq: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).powi(2))
            .collect();
        Ok(self.grid.integrate(&sq).sqrt())
    }

    /// `L¹(dV)` distance between the grid parts.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let abs: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(self.grid.integrate(&abs))
    }
}

pub(crate) fn ensure_same_grid(a: &Arc<PlanarGrid>, b: &Arc<PlanarGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.resolution() == b.resolution() {
        Ok(())
    } else {
        Err(LabError::GridMismatch(format!(
            "planar resolutions {} and {}",
            a.resolution(),
            b.resolution()
        )))
    }
}

/// Samples a radial profile (`n = 1`) on the planar grid: `u(z) = χ(log|z|)`.
pub fn radial_to_planar(u: &RadialPotential, grid: &Arc<PlanarGrid>) -> Result<PlanarPotential> {
    if u.n() != 1 {
        return Err(LabError::Unsupported(format!(
            "planar grids represent n = 1 only, got n = {}",
            u.n()
        )));
    }
    let values = (0..grid.interior_count())
        .map(|k| {
            let r = grid.radius(k);
            if r == 0.0 {
                u.eval(f64::NEG_INFINITY)
            } else {
                u.eval(r.ln())
            }
        })
        .collect();
    PlanarPotential::new_unchecked(grid.clone(), values)
}

/// JSON form of planar fields: full row-major `resolution²` array with zeros
/// outside the disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanarRecord {
    pub resolution: usize,
    pub spacing: f64,
    pub mask_hash: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub circle_atoms: Vec<CircleAtom>,
}

fn full_array(grid: &PlanarGrid, interior: &[f64]) -> Vec<f64> {
    let n = grid.resolution();
    let mut out = vec![0.0; n * n];
    for (k, v) in interior.iter().enumerate() {
        let (i, j) = grid.position(k);
        out[j * n + i] = *v;
    }
    out
}

fn csv_rows(grid: &PlanarGrid, interior: &[f64]) -> String {
    let mut out = format!(
        "# resolution={} mask_hash={}\ni,j,x,y,value\n",
        grid.resolution(),
        grid.mask_hash()
    );
    for (k, v) in interior.iter().enumerate() {
        let (i, j) = grid.position(k);
        let (x, y) = grid.point(k);
        out.push_str(&format!("{i},{j},{x:.16e},{y:.16e},{v:.16e}\n"));
    }
    out
}

impl PlanarPotential {
    pub fn to_record(&self) -> PlanarRecord {
        PlanarRecord {
            resolution: self.grid.resolution(),
            spacing: self.grid.spacing(),
            mask_hash: self.grid.mask_hash(),
            values: full_array(&self.grid, &self.values),
            circle_atoms: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        csv_rows(&self.grid, &self.values)
    }
}

impl PlanarDensity {
    pub fn to_record(&self) -> PlanarRecord {
        PlanarRecord {
            resolution: self.grid.resolution(),
            spacing: self.grid.spacing(),
            mask_hash: self.grid.mask_hash(),
            values: full_array(&self.grid, &self.density),
            circle_atoms: self.atoms.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        csv_rows(&self.grid, &self.density)
    }
}
