use super::mesh::{ScalarField, SpaceTimeGrid, SpatialGrid, Trajectory};
use crate::error::{Error, Result};

fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "mollification radius must lie in (0, 1], got {eps}"
        )));
    }
    Ok(())
}

/// Normalized weights of the radial bump on lattice offsets `|(di, dj)| h < ε`.
fn spatial_kernel(h: f64, eps: f64) -> Vec<(isize, isize, f64)> {
    let reach = (eps / h).ceil() as isize;
    let mut taps = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let r = h * ((di * di + dj * dj) as f64).sqrt();
            let w = bump(r / eps);
            if w > 0.0 {
                taps.push((di, dj, w));
            }
        }
    }
    let total: f64 = taps.iter().map(|t| t.2).sum();
    taps.iter_mut().for_each(|t| t.2 /= total);
    taps
}

/// Normalized weights of the one-dimensional bump on offsets `|k| τ < ε`.
fn temporal_kernel(tau: f64, eps: f64) -> Vec<(isize, f64)> {
    let reach = (eps / tau).ceil() as isize;
    let mut taps: Vec<(isize, f64)> = (-reach..=reach)
        .map(|k| (k, bump(k as f64 * tau / eps)))
        .filter(|t| t.1 > 0.0)
        .collect();
    let total: f64 = taps.iter().map(|t| t.1).sum();
    taps.iter_mut().for_each(|t| t.1 /= total);
    taps
}

/// Spatial convolution of one level, extended by zero outside the square.
fn convolve_space(grid: &SpatialGrid, values: &[f64], taps: &[(isize, isize, f64)]) -> Vec<f64> {
    let s = grid.side() as isize;
    let mut out = vec![0.0; values.len()];
    for j in 0..s {
        for i in 0..s {
            let mut acc = 0.0;
            for &(di, dj, w) in taps {
                let (a, b) = (i + di, j + dj);
                if a >= 0 && b >= 0 && a < s && b < s {
                    acc += w * values[(b * s + a) as usize];
                }
            }
            out[(j * s + i) as usize] = acc;
        }
    }
    out
}

/// Mollifies levels `first..first + count` of a padded stack of spatially
/// smoothed slices, extended by zero past the stack.
fn convolve_time(
    stack: &[Vec<f64>],
    first: usize,
    count: usize,
    taps: &[(isize, f64)],
) -> Vec<Vec<f64>> {
    (first..first + count)
        .map(|k| {
            let mut acc = vec![0.0; stack[0].len()];
            for &(dk, w) in taps {
                let idx = k as isize + dk;
                if idx >= 0 && (idx as usize) < stack.len() {
                    for (a, v) in acc.iter_mut().zip(&stack[idx as usize]) {
                        *a += w * v;
                    }
                }
            }
            acc
        })
        .collect()
}

fn assemble(grid: SpaceTimeGrid, levels: Vec<Vec<f64>>) -> Result<Trajectory> {
    let fields = levels
        .into_iter()
        .map(|v| ScalarField::from_values(grid.space, v))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid, fields)
}

/// Space-time convolution with the tensor bump `φ₁(y) φ₂(s)` of radius `ε`.
///
/// The sampled source is extended by zero outside its space-time box. Each
/// factor is normalized to unit mass on the lattice, so for `ε` below the
/// node spacing (or the time step) that factor is the identity.
pub fn mollify_source(f: &Trajectory, eps: f64) -> Result<Trajectory> {
    check_eps(eps)?;
    let grid = *f.grid();
    let taps = spatial_kernel(grid.space.h(), eps);
    let stack: Vec<Vec<f64>> = f
        .levels()
        .iter()
        .map(|l| convolve_space(&grid.space, l.values(), &taps))
        .collect();
    let time_taps = temporal_kernel(grid.tau(), eps);
    assemble(grid, convolve_time(&stack, 0, grid.levels(), &time_taps))
}

/// Mollifies an analytic source known beyond the time window of `grid`.
///
/// The source is sampled on the time levels of `grid` padded by `ε` at both
/// ends and extended by zero outside the spatial square.
pub fn mollify_analytic(
    f: &dyn Fn(f64, f64, f64) -> f64,
    grid: &SpaceTimeGrid,
    eps: f64,
) -> Result<Trajectory> {
    check_eps(eps)?;
    let tau = grid.tau();
    let pad = (eps / tau).ceil() as usize;
    let taps = spatial_kernel(grid.space.h(), eps);
    let stack: Vec<Vec<f64>> = (0..grid.levels() + 2 * pad)
        .map(|k| {
            let t = grid.t_start() + (k as f64 - pad as f64) * tau;
            let slice = ScalarField::from_fn(grid.space, |x, y| f(x, y, t));
            convolve_space(&grid.space, slice.values(), &taps)
        })
        .collect();
    let time_taps = temporal_kernel(tau, eps);
    assemble(*grid, convolve_time(&stack, pad, grid.levels(), &time_taps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(1.0, 32, 0.0, 1.0, 40).unwrap()
    }

    #[test]
    fn constant_is_preserved_away_from_the_boundary() {
        let g = grid();
        let eps = 0.1;
        let f = Trajectory::from_fn(g, |_, _, _| 2.5);
        let m = mollify_source(&f, eps).unwrap();
        let h = g.space.h();
        for k in 0..g.levels() {
            let t = g.time(k);
            if t < eps || t > 1.0 - eps {
                continue;
            }
            for j in 0..g.space.side() {
                for i in 0..g.space.side() {
                    let [x, y] = [i as f64 * h, j as f64 * h];
                    if x.min(y).min(1.0 - x).min(1.0 - y) > eps {
                        assert!((m.level(k).at(i, j) - 2.5).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn affine_is_preserved_in_the_interior() {
        let g = grid();
        let f = Trajectory::from_fn(g, |x, y, t| 1.0 + 3.0 * x - y + 0.5 * t);
        let m = mollify_source(&f, 0.08).unwrap();
        assert!((m.level(20).at(16, 16) - f.level(20).at(16, 16)).abs() < 1e-12);
    }

    #[test]
    fn small_radius_is_the_identity() {
        let g = grid();
        let f = Trajectory::from_fn(g, |x, y, t| (x * 7.0).sin() * y + t);
        let m = mollify_source(&f, 0.5 * g.tau().min(g.space.h())).unwrap();
        assert_eq!(m, f);
    }

    #[test]
    fn rejects_bad_radius() {
        let f = Trajectory::zeros(grid());
        assert!(mollify_source(&f, 0.0).is_err());
        assert!(mollify_source(&f, 1.5).is_err());
    }

    #[test]
    fn analytic_padding_avoids_the_time_edge() {
        let g = grid();
        let m = mollify_analytic(&|_, _, _| 1.0, &g, 0.1).unwrap();
        assert!((m.level(0).at(16, 16) - 1.0).abs() < 1e-12);
        assert!((m.last().at(16, 16) - 1.0).abs() < 1e-12);
    }
}
