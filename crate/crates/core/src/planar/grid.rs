use std::f64::consts::PI;

use crate::error::{LabError, Result};

/// Sentinel for "no interior neighbour" in the stencil tables.
pub(crate) const NONE: usize = usize::MAX;

/// Nodes this close to the unit circle are treated as boundary nodes.
const BOUNDARY_MARGIN: f64 = 1e-10;
/// Smallest admissible arm length (in units of `h`) of the irregular stencil.
const MIN_ARM: f64 = 1e-6;

/// Five-point Shortley–Weller stencil at one interior node. Arms are ordered
/// east, west, north, south.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub diag: f64,
    pub neighbors: [usize; 4],
    pub coefs: [f64; 4],
    /// Arm lengths in units of `h`; 1 for regular arms.
    pub arms: [f64; 4],
}

/// Square grid on `[-1, 1]²` restricted to the open unit disk.
///
/// Interior nodes carry unknowns; every other node is a boundary node with
/// value zero. Quadrature weights are exact areas of the node cells
/// intersected with the disk, divided by `π`; the area of cells whose node lies
/// outside the disk is handed to the nearest interior node, so the weights
/// sum to 1 (normalized `dV`).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    resolution: usize,
    h: f64,
    index: Vec<usize>,
    positions: Vec<(usize, usize)>,
    stencils: Vec<Stencil>,
    weights: Vec<f64>,
}

impl PlanarGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 16 {
            return Err(LabError::InvalidGrid(format!(
                "planar resolution must be ≥ 16, got {resolution}"
            )));
        }
        let h = 2.0 / (resolution - 1) as f64;
        let coord = |i: usize| -1.0 + i as f64 * h;
        let inside = |i: usize, j: usize| {
            let (x, y) = (coord(i), coord(j));
            (x * x + y * y).sqrt() < 1.0 - BOUNDARY_MARGIN
        };
        let mut index = vec![NONE; resolution * resolution];
        let mut positions = Vec::new();
        for j in 0..resolution {
            for i in 0..resolution {
                if inside(i, j) {
                    index[j * resolution + i] = positions.len();
                    positions.push((i, j));
                }
            }
        }
        if positions.is_empty() {
            return Err(LabError::InvalidGrid("no interior nodes".into()));
        }

        let stencils = positions
            .iter()
            .map(|&(i, j)| {
                let (x, y) = (coord(i), coord(j));
                let sx = (1.0 - y * y).max(0.0).sqrt();
                let sy = (1.0 - x * x).max(0.0).sqrt();
                let offsets: [(isize, isize, f64); 4] = [
                    (1, 0, sx - x),
                    (-1, 0, x + sx),
                    (0, 1, sy - y),
                    (0, -1, y + sy),
                ];
                let mut neighbors = [NONE; 4];
                let mut arms = [1.0; 4];
                for (k, &(di, dj, dist)) in offsets.iter().enumerate() {
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    let nb = index[nj as usize * resolution + ni as usize];
                    if nb != NONE {
                        neighbors[k] = nb;
                    } else {
                        arms[k] = (dist / h).clamp(MIN_ARM, 1.0);
                    }
                }
                let mut coefs = [0.0; 4];
                for (a, b) in [(0usize, 1usize), (2, 3)] {
                    let (ha, hb) = (arms[a] * h, arms[b] * h);
                    coefs[a] = 2.0 / (ha * (ha + hb));
                    coefs[b] = 2.0 / (hb * (ha + hb));
                }
                let diag = -coefs.iter().sum::<f64>();
                Stencil {
                    diag,
                    neighbors,
                    coefs,
                    arms,
                }
            })
            .collect();

        let mut weights = vec![0.0; positions.len()];
        for j in 0..resolution {
            for i in 0..resolution {
                let (x, y) = (coord(i), coord(j));
                let area = square_disk_area(x - h / 2.0, x + h / 2.0, y - h / 2.0, y + h / 2.0);
                if area <= 0.0 {
                    continue;
                }
                let target = match index[j * resolution + i] {
                    NONE => nearest_interior(&index, resolution, i, j),
                    k => k,
                };
                weights[target] += area / PI;
            }
        }
        Ok(Self {
            resolution,
            h,
            index,
            positions,
            stencils,
            weights,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn interior_count(&self) -> usize {
        self.positions.len()
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.h
    }

    /// Grid indices `(column, row)` of interior node `k`.
    pub fn position(&self, k: usize) -> (usize, usize) {
        self.positions[k]
    }

    /// Cartesian coordinates of interior node `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.positions[k];
        (self.coordinate(i), self.coordinate(j))
    }

    pub fn radius(&self, k: usize) -> f64 {
        let (x, y) = self.point(k);
        x.hypot(y)
    }

    /// Interior index of grid node `(i, j)`, if it is interior.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        match self.index.get(j * self.resolution + i) {
            Some(&k) if k != NONE => Some(k),
            _ => None,
        }
    }

    pub fn stencil(&self, k: usize) -> &Stencil {
        &self.stencils[k]
    }

    pub(crate) fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    /// `dV` quadrature weights of the interior nodes (sum to 1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Discrete Laplacian of interior values (zero boundary data).
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.stencils
            .iter()
            .enumerate()
            .map(|(k, s)| apply_stencil(s, u, u[k]))
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `(1/2π) Σ_edges (u_a − u_b)²` over all grid edges touching an interior
    /// node, boundary nodes carrying zero.
    pub fn dirichlet_form(&self, u: &[f64]) -> f64 {
        let n = self.resolution;
        let value = |i: usize, j: usize| self.interior_index(i, j).map_or(0.0, |k| u[k]);
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..n {
                let here = self.interior_index(i, j);
                if i + 1 < n && (here.is_some() || self.interior_index(i + 1, j).is_some()) {
                    let d = value(i, j) - value(i + 1, j);
                    sum += d * d;
                }
                if j + 1 < n && (here.is_some() || self.interior_index(i, j + 1).is_some()) {
                    let d = value(i, j) - value(i, j + 1);
                    sum += d * d;
                }
            }
        }
        sum / (2.0 * PI)
    }

    /// Content hash of the interior mask.
    pub fn mask_hash(&self) -> String {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write_u64(self.resolution as u64);
        for &(i, j) in &self.positions {
            h.write_u64(i as u64);
            h.write_u64(j as u64);
        }
        format!("{:016x}", h.finish())
    }
}

#[inline]
pub(crate) fn apply_stencil(s: &Stencil, u: &[f64], center: f64) -> f64 {
    let mut acc = s.diag * center;
    for (&nb, &c) in s.neighbors.iter().zip(&s.coefs) {
        if nb != NONE {
            acc += c * u[nb];
        }
    }
    acc
}

fn nearest_interior(index: &[usize], n: usize, i: usize, j: usize) -> usize {
    for radius in 1..n as isize {
        let mut best: Option<(isize, usize)> = None;
        for dj in -radius..=radius {
            for di in -radius..=radius {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                    continue;
                }
                let k = index[nj as usize * n + ni as usize];
                if k != NONE {
                    let d2 = di * di + dj * dj;
                    if best.is_none_or(|(bd, bk)| d2 < bd || (d2 == bd && k < bk)) {
                        best = Some((d2, k));
                    }
                }
            }
        }
        if let Some((_, k)) = best {
            return k;
        }
    }
    unreachable!("grid has interior nodes")
}

/// Antiderivative of `sqrt(1 − x²)` on `[-1, 1]`.
fn semicircle_primitive(x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    0.5 * (x * (1.0 - x * x).max(0.0).sqrt() + x.asin())
}

/// Exact area of `[x0, x1] × [y0, y1]` intersected with the closed unit disk.
pub(crate) fn square_disk_area(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (a, b) = (x0.max(-1.0), x1.min(1.0));
    if a >= b {
        return 0.0;
    }
    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < 1.0 {
            let xb = (1.0 - y * y).sqrt();
            cuts.extend([-xb, xb].into_iter().filter(|&c| c > a && c < b));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let s = (1.0 - mid * mid).max(0.0).sqrt();
        let (top_is_circle, bot_is_circle) = (s < y1, -s > y0);
        let top = if top_is_circle { s } else { y1 };
        let bot = if bot_is_circle { -s } else { y0 };
        if top <= bot {
            continue;
        }
        let arc = semicircle_primitive(hi) - semicircle_primitive(lo);
        let top_int = if top_is_circle { arc } else { y1 * (hi - lo) };
        let bot_int = if bot_is_circle { -arc } else { y0 * (hi - lo) };
        area += top_int - bot_int;
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grids() {
        assert!(PlanarGrid::new(8).is_err());
    }

    #[test]
    fn square_area_pieces() {
        assert!((square_disk_area(-2.0, 2.0, -2.0, 2.0) - PI).abs() < 1e-14);
        assert!((square_disk_area(0.0, 2.0, 0.0, 2.0) - PI / 4.0).abs() < 1e-14);
        assert!((square_disk_area(-0.1, 0.1, -0.1, 0.1) - 0.04).abs() < 1e-15);
        assert_eq!(square_disk_area(1.0, 2.0, 1.0, 2.0), 0.0);
        // quarter-disk minus square [0,0.5]^2 inside it
        let ring = square_disk_area(0.0, 2.0, 0.0, 2.0) - square_disk_area(0.0, 0.5, 0.0, 0.5);
        assert!((ring - (PI / 4.0 - 0.25)).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [16, 33, 64] {
            let g = PlanarGrid::new(n).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "n = {n}: {total}");
        }
    }

    #[test]
    fn stencil_is_exact_for_quadratics() {
        let g = PlanarGrid::new(40).unwrap();
        let u: Vec<f64> = (0..g.interior_count())
            .map(|k| {
                let r = g.radius(k);
                r * r - 1.0
            })
            .collect();
        for (k, l) in g.laplacian(&u).iter().enumerate() {
            assert!((l - 4.0).abs() < 1e-8, "node {k}: {l}");
        }
    }
}
