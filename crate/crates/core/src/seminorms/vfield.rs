use rayon::prelude::*;

use super::region::Cylinder;
use crate::error::Result;
use crate::grid::{discrete_gradient, ScalarField, Trajectory};
use crate::maps::GProfile;

/// Cell averages of `V(grad u)`, row-major over cells.
fn cell_v_field(u: &ScalarField, profile: &GProfile) -> Result<Vec<[f64; 2]>> {
    let g = *u.grid();
    let n = g.cells();
    let v = discrete_gradient(u).try_map(|xi| profile.v_map_2d(xi))?;
    Ok((0..n * n).map(|c| v.cell_average(c % n, c / n)).collect())
}

/// `∫_Q |D_x V(Du)|² dz` with `V` evaluated on the triangle gradients,
/// averaged per cell, and differentiated by central differences between
/// neighbouring cell centres. The ball needs a one-cell margin inside the
/// square.
pub fn grad_l2_of_v(traj: &Trajectory, profile: &GProfile, cyl: &Cylinder) -> Result<f64> {
    let grid = traj.grid();
    let space = grid.space;
    let h = space.h();
    cyl.check_inside(grid, h)?;
    let n = space.cells();
    let ball = cyl.ball();
    let cells: Vec<(usize, usize)> = (0..n * n)
        .map(|c| (c % n, c / n))
        .filter(|&(i, j)| ball.contains([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]))
        .collect();
    let per_level: Vec<f64> = cyl
        .level_weights(grid)
        .par_iter()
        .map(|&(k, wk)| -> Result<f64> {
            let v = cell_v_field(traj.level(k), profile)?;
            let at = |i: usize, j: usize| v[j * n + i];
            Ok(cells
                .iter()
                .map(|&(i, j)| {
                    let (e, w, nn, s) = (at(i + 1, j), at(i - 1, j), at(i, j + 1), at(i, j - 1));
                    let dx = [(e[0] - w[0]) / (2.0 * h), (e[1] - w[1]) / (2.0 * h)];
                    let dy = [(nn[0] - s[0]) / (2.0 * h), (nn[1] - s[1]) / (2.0 * h)];
                    dx[0] * dx[0] + dx[1] * dx[1] + dy[0] * dy[0] + dy[1] * dy[1]
                })
                .sum::<f64>()
                * wk)
        })
        .collect::<Result<_>>()?;
    Ok(per_level.iter().sum::<f64>() * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::grid::SpaceTimeGrid;
    use crate::maps::{DegenParams, QuadratureConfig};

    #[test]
    fn cone_has_zero_v_energy() {
        let grid = SpaceTimeGrid::new(1.0, 24, 0.0, 0.16, 4).unwrap();
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        let profile = GProfile::tabulated(&params, &QuadratureConfig::default()).unwrap();
        // the interpolant overshoots the slope by at most a factor 1.24
        let u = Trajectory::from_fn(grid, |x, y, _| 0.75 * (x - 0.52).hypot(y - 0.52));
        let cyl = Cylinder::centered(&grid, 0.3).unwrap();
        assert_eq!(grad_l2_of_v(&u, &profile, &cyl).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_potential_gives_exact_hessian_energy() {
        let grid = SpaceTimeGrid::new(1.0, 32, 0.0, 0.16, 4).unwrap();
        let params = DegenParams::with_default_alpha(2.0, 0.0, 0.0).unwrap();
        let profile = GProfile::exact(&params, &QuadratureConfig::default()).unwrap();
        // V(ξ) = ξ here, so V(Du) is affine with |D²u|² = 2² + 2·1² + (−3)²
        let u = Trajectory::from_fn(grid, |x, y, _| x * x + x * y - 1.5 * y * y);
        let cyl = Cylinder::centered(&grid, 0.3).unwrap();
        let h = grid.space.h();
        let count = (0..32 * 32)
            .filter(|c| {
                let (i, j) = (c % 32, c / 32);
                cyl.ball()
                    .contains([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h])
            })
            .count() as f64;
        let time = 0.09;
        let expected = 15.0 * count * h * h * time;
        let got = grad_l2_of_v(&u, &profile, &cyl).unwrap();
        assert!(
            (got - expected).abs() <= 1e-10 * expected,
            "{got} {expected}"
        );
    }

    #[test]
    fn margin_is_enforced() {
        let grid = SpaceTimeGrid::new(1.0, 10, 0.0, 0.25, 4).unwrap();
        let params = DegenParams::with_default_alpha(2.0, 0.0, 0.0).unwrap();
        let profile = GProfile::exact(&params, &QuadratureConfig::default()).unwrap();
        let cyl = Cylinder::centered(&grid, 0.45).unwrap();
        assert!(matches!(
            grad_l2_of_v(&Trajectory::zeros(grid), &profile, &cyl),
            Err(Error::InvalidRegion(_))
        ));
    }
}
