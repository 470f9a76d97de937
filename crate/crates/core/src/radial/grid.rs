use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Log-radius grid `t_min = t_0 < … < t_M = 0` on the unit ball of `C^n`.
///
/// The boundary `|z| = 1` is the node `t_M = 0`. Potentials are extended
/// constantly below `t_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
    nodes: Vec<f64>,
}

/// Nodes closer than this (relative to the grid extent) are merged when
/// breakpoints are inserted.
const MERGE_TOL: f64 = 1e-12;

impl RadialGrid {
    /// Uniform grid with `count` nodes on `[t_min, 0]`.
    ///
    /// Nodes are computed from the right, `t_i = -(M - i) h`, so that
    /// multiples of the spacing near the boundary are represented exactly.
    pub fn uniform(n: usize, t_min: f64, count: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_min < 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "t_min must be negative, got {t_min}"
            )));
        }
        if count < 3 {
            return Err(LabError::InvalidGrid(format!(
                "need at least 3 nodes, got {count}"
            )));
        }
        let m = count - 1;
        let h = -t_min / m as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| -((m - i) as f64) * h).collect();
        nodes[0] = t_min;
        nodes[m] = 0.0;
        Self::from_nodes(n, nodes)
    }

    pub fn from_nodes(n: usize, nodes: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidGrid(
                "complex dimension must be at least 1".into(),
            ));
        }
        if nodes.len() < 3 {
            return Err(LabError::InvalidGrid(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(LabError::InvalidGrid("non-finite node".into()));
        }
        if *nodes.last().unwrap() != 0.0 {
            return Err(LabError::InvalidGrid("last node must be exactly 0".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidGrid(format!(
                "nodes must be strictly increasing (nodes {i} and {})",
                i + 1
            )));
        }
        Ok(Self { n, nodes })
    }

    /// Copy of this grid with the given log-radii inserted as nodes. Points
    /// outside `(t_min, 0)` or within a relative `1e-12` of an existing node
    /// are ignored.
    pub fn with_breakpoints(&self, points: &[f64]) -> Result<Self> {
        let scale = self.t_min().abs().max(1.0);
        let mut nodes = self.nodes.clone();
        for &p in points {
            if !p.is_finite() || p <= self.t_min() || p >= 0.0 {
                continue;
            }
            let pos = nodes.partition_point(|&t| t < p);
            let near = |i: usize| {
                nodes
                    .get(i)
                    .is_some_and(|&t| (t - p).abs() <= MERGE_TOL * scale)
            };
            if near(pos) || (pos > 0 && near(pos - 1)) {
                continue;
            }
            nodes.insert(pos, p);
        }
        Self::from_nodes(self.n, nodes)
    }

    /// Same nodes, different complex dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        Self::from_nodes(n, self.nodes.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the boundary node `t_M = 0`.
    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    /// Length of segment `i`, i.e. `t_i - t_{i-1}` for `i ≥ 1`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Node index equal to `t` up to the merge tolerance.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let scale = self.t_min().abs().max(1.0);
        let pos = self.nodes.partition_point(|&x| x < t);
        [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.nodes.len())
            .find(|&i| (self.nodes[i] - t).abs() <= MERGE_TOL * scale)
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.nodes == other.nodes
    }

    /// Normalized volume of the ball `{log|z| ≤ t}`, i.e. `|z|^{2n}`.
    pub fn ball_volume(&self, t: f64) -> f64 {
        (2.0 * self.n as f64 * t).exp()
    }

    /// Right edges of the dual cells used for nodal quadrature.
    ///
    /// Cell `i < M - 1` is `(b_{i-1}, b_i]` with `b_i` the midpoint of
    /// segment `i + 1`; cell `M - 1` extends to the boundary and cell `M` is
    /// empty. Cell 0 starts at `-∞`.
    pub fn cell_right_edges(&self) -> Vec<f64> {
        let m = self.last();
        let mut edges: Vec<f64> = (0..m)
            .map(|i| 0.5 * (self.nodes[i] + self.nodes[i + 1]))
            .collect();
        edges[m - 1] = 0.0;
        edges.push(0.0);
        edges
    }

    /// Normalized volume `dV` of each dual cell; sums to 1.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let edges = self.cell_right_edges();
        let mut prev = 0.0;
        edges
            .iter()
            .map(|&b| {
                let v = self.ball_volume(b);
                let out = v - prev;
                prev = v;
                out
            })
            .collect()
    }

    /// Short human-readable content hash of the grid.
    pub fn hash_hex(&self) -> String {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write_u64(self.n as u64);
        for t in &self.nodes {
            h.write_u64(t.to_bits());
        }
        format!("{:016x}", h.finish())
    }
}
