use crate::error::{Error, Result};
use crate::grid::{ScalarField, SpatialGrid};

/// Increment `τ_h F = F(· + h e_j) − F` and quotient `Δ_h F = τ_h F / h` on
/// the nodes at distance more than `|h|` from the boundary. Both fields are
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    pub direction: usize,
    pub shift: f64,
    pub tau: ScalarField,
    pub delta: ScalarField,
    /// Nodes of the shrunken region.
    pub region: Vec<bool>,
}

/// Converts a physical shift to a whole number of grid steps.
pub(crate) fn shift_steps(grid: &SpatialGrid, shift: f64) -> Result<isize> {
    let k = shift / grid.h();
    let r = k.round();
    if !shift.is_finite() || shift == 0.0 || (k - r).abs() > 1e-9 * k.abs().max(1.0) {
        return Err(Error::InvalidShift(format!(
            "shift {shift} is not a nonzero multiple of the spacing {}",
            grid.h()
        )));
    }
    Ok(r as isize)
}

/// Nodes at distance more than `dist` from the boundary of the square.
pub(crate) fn shrunken_region(grid: &SpatialGrid, dist: f64) -> Vec<bool> {
    let l = grid.length();
    let tol = 1e-9 * grid.h();
    let mut m = vec![false; grid.num_nodes()];
    for j in 0..grid.side() {
        for i in 0..grid.side() {
            let [x, y] = grid.node_position(i, j);
            m[grid.node(i, j)] = x.min(y).min(l - x).min(l - y) > dist + tol;
        }
    }
    m
}

/// Difference of `field` along axis `direction` (0 for `x`, 1 for `y`).
pub fn finite_difference(field: &ScalarField, direction: usize, shift: f64) -> Result<Difference> {
    if direction > 1 {
        return Err(Error::InvalidInput(format!(
            "direction must be 0 or 1 (got {direction})"
        )));
    }
    let grid = *field.grid();
    let k = shift_steps(&grid, shift)?;
    let region = shrunken_region(&grid, shift.abs());
    let mut tau = vec![0.0; grid.num_nodes()];
    for j in 0..grid.side() {
        for i in 0..grid.side() {
            let n = grid.node(i, j);
            if !region[n] {
                continue;
            }
            let (ii, jj) = if direction == 0 {
                ((i as isize + k) as usize, j)
            } else {
                (i, (j as isize + k) as usize)
            };
            tau[n] = field.at(ii, jj) - field.at(i, j);
        }
    }
    let delta = tau.iter().map(|t| t / shift).collect();
    Ok(Difference {
        direction,
        shift,
        tau: ScalarField::from_values(grid, tau)?,
        delta: ScalarField::from_values(grid, delta)?,
        region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: SpatialGrid, rng: &mut ChaCha8Rng) -> ScalarField {
        ScalarField::from_values(
            g,
            (0..g.num_nodes())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn affine_field_has_exact_slope() {
        let g = SpatialGrid::new(2.0, 20).unwrap();
        let u = ScalarField::from_fn(g, |x, y| 1.0 + 3.0 * x - 0.5 * y);
        for (dir, slope) in [(0, 3.0), (1, -0.5)] {
            for shift in [0.1, -0.3, 0.5] {
                let d = finite_difference(&u, dir, shift).unwrap();
                for (v, &inside) in d.delta.values().iter().zip(&d.region) {
                    if inside {
                        assert!((v - slope).abs() < 1e-12);
                    } else {
                        assert_eq!(*v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn misaligned_shift_is_rejected() {
        let g = SpatialGrid::new(1.0, 10).unwrap();
        let u = ScalarField::zeros(g);
        assert!(matches!(
            finite_difference(&u, 0, 0.15),
            Err(Error::InvalidShift(_))
        ));
        assert!(matches!(
            finite_difference(&u, 1, 0.0),
            Err(Error::InvalidShift(_))
        ));
    }

    #[test]
    fn leibniz_rule_is_exact() {
        let g = SpatialGrid::new(1.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_field(g, &mut rng);
        let gg = random_field(g, &mut rng);
        let prod = ScalarField::from_values(
            g,
            f.values()
                .iter()
                .zip(gg.values())
                .map(|(a, b)| a * b)
                .collect(),
        )
        .unwrap();
        for dir in 0..2 {
            for shift in [1.0 / 16.0, -3.0 / 16.0] {
                let k = (shift * 16.0f64).round() as isize;
                let dfg = finite_difference(&prod, dir, shift).unwrap();
                let df = finite_difference(&f, dir, shift).unwrap();
                let dg = finite_difference(&gg, dir, shift).unwrap();
                for j in 0..g.side() {
                    for i in 0..g.side() {
                        let n = g.node(i, j);
                        if !dfg.region[n] {
                            continue;
                        }
                        let (ii, jj) = if dir == 0 {
                            ((i as isize + k) as usize, j)
                        } else {
                            (i, (j as isize + k) as usize)
                        };
                        let rhs = f.at(ii, jj) * dg.delta.values()[n]
                            + gg.at(i, j) * df.delta.values()[n];
                        assert!((dfg.delta.values()[n] - rhs).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn summation_by_parts_for_compact_support() {
        let g = SpatialGrid::new(1.0, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bump = |x: f64, y: f64, r: &mut ChaCha8Rng| {
            if (x - 0.5).abs() < 0.2 && (y - 0.5).abs() < 0.2 {
                r.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        };
        let mut fv = vec![0.0; g.num_nodes()];
        let mut gv = vec![0.0; g.num_nodes()];
        for j in 0..g.side() {
            for i in 0..g.side() {
                let [x, y] = g.node_position(i, j);
                fv[g.node(i, j)] = bump(x, y, &mut rng);
                gv[g.node(i, j)] = bump(x, y, &mut rng);
            }
        }
        let f = ScalarField::from_values(g, fv).unwrap();
        let gg = ScalarField::from_values(g, gv).unwrap();
        let h2 = g.h() * g.h();
        for dir in 0..2 {
            let h = 2.0 * g.h();
            let lhs: f64 = f
                .values()
                .iter()
                .zip(finite_difference(&gg, dir, h).unwrap().delta.values())
                .map(|(a, b)| a * b * h2)
                .sum();
            let rhs: f64 = gg
                .values()
                .iter()
                .zip(finite_difference(&f, dir, -h).unwrap().delta.values())
                .map(|(a, b)| a * b * h2)
                .sum();
            assert!((lhs + rhs).abs() < 1e-12, "{lhs} {rhs}");
        }
    }

    #[test]
    fn increments_are_bounded_by_the_unit_quotient() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y + 0.3).cos() + x * x);
        let h0 = g.h();
        let q = 3.0;
        let unit = finite_difference(&u, 0, h0).unwrap();
        let unit_sum: f64 = unit.delta.values().iter().map(|v| v.abs().powf(q)).sum();
        for k in [2usize, 4, 8] {
            let d = finite_difference(&u, 0, k as f64 * h0).unwrap();
            let lhs: f64 = d.tau.values().iter().map(|v| v.abs().powf(q)).sum();
            let rhs = (k as f64 * h0).powf(q) * unit_sum;
            assert!(lhs <= rhs, "k={k}: {lhs} > {rhs}");
        }
    }
}
