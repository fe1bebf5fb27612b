use super::region::{Ball, Cylinder};
use crate::error::{Error, Result};
use crate::grid::{SpaceTimeGrid, Trajectory};

/// `Σ_k w_k Σ_{nodes in ball} w_n g(k, i, j)` over the levels of the cylinder.
fn node_integral(
    grid: &SpaceTimeGrid,
    cyl: &Cylinder,
    g: impl Fn(usize, usize, usize) -> f64,
) -> f64 {
    let nodes = cyl.ball().nodes(&grid.space);
    cyl.level_weights(grid)
        .into_iter()
        .map(|(k, wk)| {
            nodes
                .iter()
                .map(|&(i, j)| grid.space.node_weight(i, j) * g(k, i, j))
                .sum::<f64>()
                * wk
        })
        .sum()
}

/// `Σ_k w_k Σ_{triangles with centroid in ball} |T| g(k, i, j, tri)`.
pub(crate) fn triangle_integral(
    grid: &SpaceTimeGrid,
    cyl: &Cylinder,
    mut g: impl FnMut(usize, usize, usize, usize) -> f64,
) -> f64 {
    let ball = cyl.ball();
    let n = grid.space.cells();
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            for t in 0..2 {
                if ball.contains(grid.space.triangle_centroid(i, j, t)) {
                    tris.push((i, j, t));
                }
            }
        }
    }
    let area = grid.space.triangle_area();
    let mut total = 0.0;
    for (k, wk) in cyl.level_weights(grid) {
        let level: f64 = tris.iter().map(|&(i, j, t)| g(k, i, j, t)).sum();
        total += level * area * wk;
    }
    total
}

/// `(∫_{Q_ρ} |u|^p dz)^{1/p}` by the backward rectangle rule in time and the nodal
/// rule in space, restricted to nodes inside the ball.
pub fn lp_norm_cylinder(field: &Trajectory, cyl: &Cylinder, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "exponent must lie in [1, inf) (got {p})"
        )));
    }
    let grid = field.grid();
    cyl.check_inside(grid, 0.0)?;
    let s = node_integral(grid, cyl, |k, i, j| field.level(k).at(i, j).abs().powf(p));
    Ok(s.powf(1.0 / p))
}

/// `max_k ‖u(·, t_k)‖_{L²(B)}` over levels with `t_k` in the closed window.
pub fn sup_l2_in_time(field: &Trajectory, ball: &Ball, window: (f64, f64)) -> Result<f64> {
    let grid = field.grid();
    let (a, b) = window;
    if !(a <= b) {
        return Err(Error::InvalidRegion(format!(
            "empty time window ({a}, {b})"
        )));
    }
    ball.check_inside(&grid.space, 0.0)?;
    let tol = 1e-9 * (grid.t_end() - grid.t_start()).max(1.0);
    if a < grid.t_start() - tol || b > grid.t_end() + tol {
        return Err(Error::InvalidRegion(format!(
            "time window ({a}, {b}) leaves [{}, {}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let nodes = ball.nodes(&grid.space);
    let tol_t = 1e-9 * grid.tau();
    let levels: Vec<usize> = (0..grid.levels())
        .filter(|&k| grid.time(k) >= a - tol_t && grid.time(k) <= b + tol_t)
        .collect();
    if levels.is_empty() {
        return Err(Error::InvalidRegion(format!("no time level in ({a}, {b})")));
    }
    Ok(levels
        .into_iter()
        .map(|k| {
            let u = field.level(k);
            nodes
                .iter()
                .map(|&(i, j)| grid.space.node_weight(i, j) * u.at(i, j).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}
