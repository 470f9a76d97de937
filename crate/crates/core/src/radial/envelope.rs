use std::sync::Arc;

use super::grid::RadialGrid;
use super::potential::RadialPotential;
use crate::error::{LabError, Result};

/// Largest convex nondecreasing minorant of `min(phi, 0)`, pinned to zero on
/// the boundary sphere.
///
/// Steps: lower convex hull of the graph (monotone chain), nondecreasing
/// flattening `g(t) = min_{s ≥ t} h(s)`, then `g(0) := 0`. Each step keeps the
/// result below `phi` except at the boundary node, where the value is reset to
/// zero.
pub fn envelope_p(grid: &Arc<RadialGrid>, phi: &[f64]) -> Result<RadialPotential> {
    if phi.len() != grid.len() {
        return Err(LabError::GridMismatch(format!(
            "{} values for a grid of {} nodes",
            phi.len(),
            grid.len()
        )));
    }
    if phi.iter().any(|x| !x.is_finite()) {
        return Err(LabError::InvalidArgument(
            "envelope of a non-finite function".into(),
        ));
    }
    let nodes = grid.nodes();
    let phi: Vec<f64> = phi.iter().map(|&x| x.min(0.0)).collect();
    let hull = lower_hull(nodes, &phi);
    let mut values = vec![0.0; phi.len()];
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let slope = (phi[b] - phi[a]) / (nodes[b] - nodes[a]);
        for i in a..=b {
            values[i] = if i == a || i == b {
                phi[i]
            } else {
                phi[a] + slope * (nodes[i] - nodes[a])
            };
        }
    }
    let last = values.len() - 1;
    for i in (0..last).rev() {
        values[i] = values[i].min(values[i + 1]);
    }
    values[last] = 0.0;
    RadialPotential::new_unchecked(grid.clone(), values)
}

/// Indices of the lower convex hull of `(x_i, y_i)`, `x` increasing.
fn lower_hull(x: &[f64], y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}
