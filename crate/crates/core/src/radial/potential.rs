use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use crate::error::{LabError, Result};

/// Default relative tolerance for the convexity and monotonicity checks.
pub const TOL_CONVEX: f64 = 1e-12;

/// Radial plurisubharmonic potential `u(z) = χ(log|z|)` on the unit ball.
///
/// `χ` is stored at the grid nodes and read as its piecewise-linear
/// interpolant, extended constantly below `t_min`. Valid profiles are
/// nondecreasing, convex, nonpositive and vanish at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    grid: Arc<RadialGrid>,
    chi: Vec<f64>,
}

impl RadialPotential {
    pub fn new(grid: Arc<RadialGrid>, chi: Vec<f64>) -> Result<Self> {
        let u = Self::new_unchecked(grid, chi)?;
        u.validate(TOL_CONVEX)?;
        Ok(u)
    }

    /// Builds the potential without checking convexity or monotonicity. The
    /// length still has to match the grid.
    pub fn new_unchecked(grid: Arc<RadialGrid>, chi: Vec<f64>) -> Result<Self> {
        if chi.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                chi.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, chi })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let chi = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, chi)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let chi = vec![0.0; grid.len()];
        Self { grid, chi }
    }

    /// `m · max(log|z|, c)`. The kink is inserted into the grid when it is
    /// not already a node, so the result carries its own grid.
    pub fn truncated_log(grid: &RadialGrid, m: f64, c: f64) -> Result<Self> {
        if m < 0.0 || !(c < 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "truncated log needs m ≥ 0 and c < 0 (m = {m}, c = {c})"
            )));
        }
        let grid = Arc::new(grid.with_breakpoints(&[c])?);
        Self::from_fn(grid, |t| m * t.max(c))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.chi
    }

    pub fn into_values(self) -> Vec<f64> {
        self.chi
    }

    /// Slope of segment `i` (`1 ≤ i ≤ M`); `slope(0)` is the constant
    /// extension below `t_min`, i.e. zero.
    pub fn slope(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            (self.chi[i] - self.chi[i - 1]) / self.grid.spacing(i)
        }
    }

    /// Slopes of segments `0..=M`, segment 0 being the flat extension.
    pub fn slopes(&self) -> Vec<f64> {
        (0..self.chi.len()).map(|i| self.slope(i)).collect()
    }

    /// Value of the piecewise-linear interpolant at log-radius `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let nodes = self.grid.nodes();
        if t <= nodes[0] {
            return self.chi[0];
        }
        if t >= 0.0 {
            return 0.0;
        }
        let j = nodes.partition_point(|&x| x < t).max(1);
        let (a, b) = (nodes[j - 1], nodes[j]);
        let w = (t - a) / (b - a);
        self.chi[j - 1] * (1.0 - w) + self.chi[j] * w
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            chi: self.chi.iter().map(|x| lambda * x).collect(),
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let chi = self
            .chi
            .iter()
            .zip(&other.chi)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            chi,
        })
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.chi
            .iter()
            .zip(&other.chi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.chi.iter().all(|&x| x == 0.0)
    }

    /// Checks every invariant, reporting the first offending node.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let nodes = self.grid.nodes();
        let last = self.grid.last();
        let violation = |node: usize, what: String| LabError::InvariantViolation {
            node,
            t: nodes[node],
            what,
        };
        if let Some(i) = self.chi.iter().position(|x| !x.is_finite()) {
            return Err(violation(i, "non-finite value".into()));
        }
        if self.chi[last] != 0.0 {
            return Err(violation(
                last,
                format!("boundary value {} ≠ 0", self.chi[last]),
            ));
        }
        let scale = self.chi[0].abs().max(1.0);
        let mut prev_slope = 0.0;
        for i in 1..=last {
            let s = self.slope(i);
            let slack = tol * scale / self.grid.spacing(i).min(1.0);
            if s - prev_slope < -slack {
                return Err(violation(
                    i - 1,
                    format!("non-convex profile (slope drop {:e})", s - prev_slope),
                ));
            }
            if s < -slack {
                return Err(violation(i, format!("decreasing profile (slope {s:e})")));
            }
            prev_slope = s;
        }
        Ok(())
    }
}

/// Rotation-invariant positive measure stored as cumulative masses
/// `G(t_i) = μ({log|z| ≤ t_i})`.
///
/// The mass lumped at or below `t_min` is `G(t_0)`; it is also exposed as
/// [`RadialMeasure::atom_at_origin`] because it stands for mass the grid
/// cannot resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMeasure {
    grid: Arc<RadialGrid>,
    g: Vec<f64>,
}

impl RadialMeasure {
    pub fn from_cumulative(grid: Arc<RadialGrid>, g: Vec<f64>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} cumulative values for a grid of {} nodes",
                g.len(),
                grid.len()
            )));
        }
        if let Some(node) = g.iter().position(|x| !x.is_finite()) {
            return Err(LabError::InvariantViolation {
                node,
                t: grid.nodes()[node],
                what: "non-finite cumulative mass".into(),
            });
        }
        if let Some(node) = g.iter().position(|&x| x < 0.0) {
            return Err(LabError::NegativeMeasure {
                node,
                value: g[node],
            });
        }
        let scale = g.iter().fold(1.0f64, |a, &b| a.max(b));
        for i in 1..g.len() {
            if g[i] < g[i - 1] - 1e-12 * scale {
                return Err(LabError::NegativeMeasure {
                    node: i,
                    value: g[i] - g[i - 1],
                });
            }
        }
        Ok(Self { grid, g })
    }

    /// Measure from nonnegative masses attached to the nodes.
    pub fn from_node_masses(grid: Arc<RadialGrid>, masses: &[f64]) -> Result<Self> {
        if let Some(node) = masses.iter().position(|&m| m < 0.0) {
            return Err(LabError::NegativeMeasure {
                node,
                value: masses[node],
            });
        }
        let mut acc = 0.0;
        let g = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Self::from_cumulative(grid, g)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let g = vec![0.0; grid.len()];
        Self { grid, g }
    }

    /// Uniform mass on the sphere `|z| = e^t`; `t` must be a grid node.
    pub fn sphere_mass(grid: Arc<RadialGrid>, t: f64, mass: f64) -> Result<Self> {
        let node = grid
            .index_of(t)
            .ok_or_else(|| LabError::InvalidArgument(format!("t = {t} is not a grid node")))?;
        if node == grid.last() {
            return Err(LabError::InvalidArgument(
                "mass on the boundary sphere".into(),
            ));
        }
        let mut masses = vec![0.0; grid.len()];
        masses[node] = mass;
        Self::from_node_masses(grid, &masses)
    }

    /// Discretizes `f · dV` (density `f(t)` w.r.t. normalized volume) by
    /// nodal quadrature on the dual cells.
    pub fn from_volume_density(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let masses: Vec<f64> = grid
            .cell_volumes()
            .iter()
            .zip(grid.nodes())
            .map(|(v, &t)| if *v > 0.0 { f(t) * v } else { 0.0 })
            .collect();
        Self::from_node_masses(grid, &masses)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.g
    }

    pub fn total_mass(&self) -> f64 {
        *self.g.last().unwrap()
    }

    pub fn atom_at_origin(&self) -> f64 {
        self.g[0]
    }

    /// Mass attached to each node, `G_i - G_{i-1}`.
    pub fn node_masses(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.g
            .iter()
            .map(|&x| {
                let d = (x - prev).max(0.0);
                prev = x;
                d
            })
            .collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            g: self.g.iter().map(|x| lambda * x).collect(),
        }
    }

    /// Total variation distance, computed on node masses.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        self.node_masses()
            .iter()
            .zip(other.node_masses())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// `∫ f dμ` for node values `f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.node_masses().iter().zip(f).map(|(m, v)| m * v).sum()
    }
}

pub(crate) fn ensure_same_grid(a: &RadialGrid, b: &RadialGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(LabError::GridMismatch(format!(
            "grids differ ({} nodes, n = {} vs {} nodes, n = {})",
            a.len(),
            a.n(),
            b.len(),
            b.n()
        )))
    }
}

/// JSON form shared by potentials and measures.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RadialRecord {
    pub n: usize,
    pub t: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chi: Option<Vec<f64>>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none", default)]
    pub g: Option<Vec<f64>>,
    pub atom_at_origin: f64,
}

impl RadialPotential {
    pub fn to_record(&self) -> RadialRecord {
        RadialRecord {
            n: self.n(),
            t: self.grid.nodes().to_vec(),
            chi: Some(self.chi.clone()),
            g: None,
            atom_at_origin: self.slope(1).max(0.0).powi(self.n() as i32),
        }
    }

    pub fn from_record(rec: &RadialRecord) -> Result<Self> {
        let chi = rec
            .chi
            .clone()
            .ok_or_else(|| LabError::InvalidArgument("record has no \"chi\" field".into()))?;
        let grid = Arc::new(RadialGrid::from_nodes(rec.n, rec.t.clone())?);
        Self::new(grid, chi)
    }

    /// CSV with one row per node: `t,chi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,chi\n");
        for (t, x) in self.grid.nodes().iter().zip(&self.chi) {
            out.push_str(&format!("{t:.16e},{x:.16e}\n"));
        }
        out
    }
}

impl RadialMeasure {
    pub fn to_record(&self) -> RadialRecord {
        RadialRecord {
            n: self.grid.n(),
            t: self.grid.nodes().to_vec(),
            chi: None,
            g: Some(self.g.clone()),
            atom_at_origin: self.atom_at_origin(),
        }
    }

    pub fn from_record(rec: &RadialRecord) -> Result<Self> {
        let g = rec
            .g
            .clone()
            .ok_or_else(|| LabError::InvalidArgument("record has no \"G\" field".into()))?;
        let grid = Arc::new(RadialGrid::from_nodes(rec.n, rec.t.clone())?);
        Self::from_cumulative(grid, g)
    }

    /// CSV with one row per node: `t,G`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,G\n");
        for (t, x) in self.grid.nodes().iter().zip(&self.g) {
            out.push_str(&format!("{t:.16e},{x:.16e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(1, -5.0, 11).unwrap())
    }

    #[test]
    fn validation_names_first_bad_node() {
        let g = grid();
        let mut chi: Vec<f64> = g.nodes().iter().map(|&t| t.max(-2.0)).collect();
        chi[3] = -1.0;
        match RadialPotential::new(g.clone(), chi) {
            Err(LabError::InvariantViolation { node, .. }) => assert_eq!(node, 3),
            other => panic!("unexpected {other:?}"),
        }
        let concave: Vec<f64> = g.nodes().iter().map(|&t| -(t * t)).collect();
        let mut concave = concave;
        *concave.last_mut().unwrap() = 0.0;
        assert!(matches!(
            RadialPotential::new(g.clone(), concave),
            Err(LabError::InvariantViolation { .. })
        ));
        let mut off = vec![0.0; g.len()];
        off[10] = -0.5;
        assert!(RadialPotential::new(g, off).is_err());
    }

    #[test]
    fn eval_interpolates_and_extends() {
        let u = RadialPotential::truncated_log(&grid(), 1.0, -2.0).unwrap();
        assert_eq!(u.eval(-100.0), -2.0);
        assert!((u.eval(-0.25) + 0.25).abs() < 1e-15);
        assert_eq!(u.eval(0.5), 0.0);
    }

    #[test]
    fn measure_rejects_decrease() {
        let g = grid();
        let mut cum = vec![1.0; g.len()];
        cum[4] = 0.5;
        assert!(matches!(
            RadialMeasure::from_cumulative(g.clone(), cum),
            Err(LabError::NegativeMeasure { node: 4, .. })
        ));
        assert!(RadialMeasure::from_cumulative(g, vec![-1.0; 11]).is_err());
    }

    #[test]
    fn json_record_round_trip() {
        let u = RadialPotential::truncated_log(&grid(), 2.0, -1.5).unwrap();
        let json = serde_json::to_string(&u.to_record()).unwrap();
        assert!(json.contains("\"chi\""));
        let back: RadialRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(RadialPotential::from_record(&back).unwrap(), u);
        let csv = u.to_csv();
        assert_eq!(csv.lines().count(), u.grid().len() + 1);
    }
}
