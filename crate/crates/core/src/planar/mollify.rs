use super::field::PlanarDensity;
use crate::error::{LabError, Result};

/// Regularizes `μ` at scale `eps`: the grid density is convolved with the
/// normalized bump `(1 − |x|²/ε²)₊`, and every circle atom at radius `r`
/// becomes the radial density `∝ (1 − ((|z| − r)/ε)²)₊` of the same mass.
/// Total mass is preserved exactly (up to rounding).
pub fn mollify(mu: &PlanarDensity, eps: f64) -> Result<PlanarDensity> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "mollifier width must be positive, got {eps}"
        )));
    }
    let grid = mu.grid();
    for a in mu.atoms() {
        if a.radius - eps <= 0.0 || a.radius + eps >= 1.0 {
            return Err(LabError::InvalidArgument(format!(
                "mollifier width {eps} does not fit circle atom at radius {}",
                a.radius
            )));
        }
    }
    let h = grid.spacing();
    let n = grid.resolution();
    let reach = (eps / h).floor() as isize;
    let mut kernel = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let d2 = ((di * di + dj * dj) as f64) * h * h;
            let k = 1.0 - d2 / (eps * eps);
            if k > 0.0 {
                kernel.push((di, dj, k));
            }
        }
    }
    let ksum: f64 = kernel.iter().map(|k| k.2).sum();

    let before = mu.grid_mass();
    let mut out = vec![0.0; grid.interior_count()];
    if before > 0.0 {
        for (k, slot) in out.iter_mut().enumerate() {
            let (i, j) = grid.position(k);
            let mut acc = 0.0;
            for &(di, dj, w) in &kernel {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                    continue;
                }
                if let Some(q) = grid.interior_index(ni as usize, nj as usize) {
                    acc += w * mu.density()[q];
                }
            }
            *slot = acc / ksum;
        }
        let after = grid.integrate(&out);
        let ratio = before / after;
        out.iter_mut().for_each(|v| *v *= ratio);
    }

    for a in mu.atoms() {
        let bump: Vec<f64> = (0..grid.interior_count())
            .map(|k| {
                let s = (grid.radius(k) - a.radius) / eps;
                (1.0 - s * s).max(0.0)
            })
            .collect();
        let norm = grid.integrate(&bump);
        if norm <= 0.0 {
            return Err(LabError::InvalidArgument(format!(
                "mollifier width {eps} is below the grid spacing {h}"
            )));
        }
        for (o, b) in out.iter_mut().zip(&bump) {
            *o += a.mass * b / norm;
        }
    }
    PlanarDensity::new(grid.clone(), out, Vec::new())
}
