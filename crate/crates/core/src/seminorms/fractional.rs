use std::f64::consts::PI;

use rayon::prelude::*;

use super::region::{Cylinder, Region, ShellRule, SmoothnessOrder};
use crate::error::{Error, Result};
use crate::grid::{ScalarField, SpatialGrid, Trajectory};

/// `(Σ_{x ≠ y} |v(x) − v(y)|^q / |x − y|^{2+sq} h⁴)^{1/q}` over the nodes of
/// `region`. Distinct nodes are at least `h` apart, so the diagonal is the
/// only excluded set. Uses `order.s` and `order.q`; `q` must be finite.
pub fn gagliardo_seminorm(
    field: &ScalarField,
    region: &Region,
    order: &SmoothnessOrder,
) -> Result<f64> {
    if !order.q.is_finite() {
        return Err(Error::InvalidInput(
            "the Gagliardo seminorm needs a finite q".into(),
        ));
    }
    let grid = *field.grid();
    let mask = region.mask(&grid)?;
    let pts: Vec<(i64, i64, f64)> = (0..grid.side())
        .flat_map(|j| (0..grid.side()).map(move |i| (i, j)))
        .filter(|&(i, j)| mask[grid.node(i, j)])
        .map(|(i, j)| (i as i64, j as i64, field.at(i, j)))
        .collect();
    let (s, q) = (order.s, order.q);
    let side = grid.side();
    let expo = -0.5 * (2.0 + s * q);
    let kernel: Vec<f64> = (0..side * side)
        .map(|k| {
            let (a, b) = ((k % side) as f64, (k / side) as f64);
            if k == 0 {
                0.0
            } else {
                (a * a + b * b).powf(expo)
            }
        })
        .collect();
    let rows: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(a, &(ia, ja, va))| {
            pts[a + 1..]
                .iter()
                .map(|&(ib, jb, vb)| {
                    let k = (ia - ib).unsigned_abs() as usize
                        + side * (ja - jb).unsigned_abs() as usize;
                    let d = (va - vb).abs();
                    let dq = if q == 2.0 { d * d } else { d.powf(q) };
                    dq * kernel[k]
                })
                .sum::<f64>()
        })
        .collect();
    let h = grid.h();
    let total = 2.0 * rows.iter().sum::<f64>() * h.powf(2.0 - s * q);
    Ok(total.powf(1.0 / q))
}

/// Radii and `d log ρ` trapezoid weights of the shell rule on `[h, r]`.
fn shells(h: f64, r: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let step = 10f64.powf(1.0 / per_decade as f64);
    let mut radii = vec![h];
    while radii.last().unwrap() * step <= r * (1.0 + 1e-12) {
        let next = radii.last().unwrap() * step;
        radii.push(next);
    }
    if *radii.last().unwrap() < r * (1.0 - 1e-9) {
        radii.push(r);
    }
    if radii.len() == 1 {
        return vec![(h, 10f64.ln() / per_decade as f64)];
    }
    let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let m = radii.len();
    (0..m)
        .map(|k| {
            let left = if k > 0 { logs[k] - logs[k - 1] } else { 0.0 };
            let right = if k + 1 < m {
                logs[k + 1] - logs[k]
            } else {
                0.0
            };
            (radii[k], 0.5 * (left + right))
        })
        .collect()
}

/// Zero-extended lattice copy of a masked field with bilinear sampling.
struct Extended {
    side: usize,
    values: Vec<f64>,
}

impl Extended {
    fn new(grid: &SpatialGrid, values: &[f64], mask: &[bool], pad: usize) -> Self {
        let side = grid.side() + 2 * pad;
        let mut ext = vec![0.0; side * side];
        for j in 0..grid.side() {
            for i in 0..grid.side() {
                let n = grid.node(i, j);
                if mask[n] {
                    ext[(j + pad) * side + i + pad] = values[n];
                }
            }
        }
        Self { side, values: ext }
    }

    #[inline]
    fn get(&self, i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || i >= self.side as i64 || j >= self.side as i64 {
            0.0
        } else {
            self.values[j as usize * self.side + i as usize]
        }
    }

    /// `Σ_x |v(x + d) − v(x)|^p` over the extended lattice, `d` in lattice units.
    fn increment_sum(&self, d: [f64; 2], p: f64) -> f64 {
        let (fx, fy) = (d[0].floor(), d[1].floor());
        let (ax, ay) = (d[0] - fx, d[1] - fy);
        let (ox, oy) = (fx as i64, fy as i64);
        let mut total = 0.0;
        for j in 0..self.side as i64 {
            for i in 0..self.side as i64 {
                let (x0, y0) = (i + ox, j + oy);
                let shifted = (1.0 - ax) * (1.0 - ay) * self.get(x0, y0)
                    + ax * (1.0 - ay) * self.get(x0 + 1, y0)
                    + (1.0 - ax) * ay * self.get(x0, y0 + 1)
                    + ax * ay * self.get(x0 + 1, y0 + 1);
                let diff = (shifted - self.get(i, j)).abs();
                if diff != 0.0 {
                    total += if p == 2.0 { diff * diff } else { diff.powf(p) };
                }
            }
        }
        total
    }
}

fn besov_masked(
    grid: &SpatialGrid,
    values: &[f64],
    mask: &[bool],
    order: &SmoothnessOrder,
    rule: &ShellRule,
) -> Result<f64> {
    let h = grid.h();
    if order.cutoff < h * (1.0 - 1e-9) {
        return Err(Error::InvalidInput(format!(
            "cutoff {} is below the grid spacing {h}",
            order.cutoff
        )));
    }
    if rule.shells_per_decade == 0 || rule.angles == 0 {
        return Err(Error::InvalidInput(
            "shell rule needs at least one shell and one angle".into(),
        ));
    }
    let pad = (order.cutoff / h).ceil() as usize + 2;
    let ext = Extended::new(grid, values, mask, pad);
    let shell_list = shells(h, order.cutoff.max(h), rule.shells_per_decade);
    let jobs: Vec<(usize, usize)> = (0..shell_list.len())
        .flat_map(|m| (0..rule.angles).map(move |a| (m, a)))
        .collect();
    let (s, p, q) = (order.s, order.p, order.q);
    let norms: Vec<f64> = jobs
        .par_iter()
        .map(|&(m, a)| {
            let rho = shell_list[m].0;
            let theta = 2.0 * PI * a as f64 / rule.angles as f64;
            let d = [rho * theta.cos() / h, rho * theta.sin() / h];
            (ext.increment_sum(d, p) * h * h).powf(1.0 / p)
        })
        .collect();
    if q.is_infinite() {
        return Ok(jobs
            .iter()
            .zip(&norms)
            .map(|(&(m, _), n)| n / shell_list[m].0.powf(s))
            .fold(0.0, f64::max));
    }
    let dtheta = 2.0 * PI / rule.angles as f64;
    let total: f64 = jobs
        .iter()
        .zip(&norms)
        .map(|(&(m, _), n)| {
            let (rho, w) = shell_list[m];
            w * dtheta * (n / rho.powf(s)).powf(q)
        })
        .sum();
    Ok(total.powf(1.0 / q))
}

/// Difference characterization of the `B^s_{p,q}` seminorm of the field
/// extended by zero outside the square:
/// `(∫_{h ≤ |z| ≤ r} (‖v(·+z) − v‖_{L^p} / |z|^s)^q dz/|z|²)^{1/q}`, or the
/// supremum over the same increments for `q = ∞`.
pub fn besov_seminorm(field: &ScalarField, order: &SmoothnessOrder) -> Result<f64> {
    besov_seminorm_with(field, &Region::Square, order, &ShellRule::default())
}

/// [`besov_seminorm`] on a region, with an explicit shell rule.
pub fn besov_seminorm_with(
    field: &ScalarField,
    region: &Region,
    order: &SmoothnessOrder,
    rule: &ShellRule,
) -> Result<f64> {
    let grid = *field.grid();
    let mask = region.mask(&grid)?;
    besov_masked(&grid, field.values(), &mask, order, rule)
}

/// `L^{p′}(t₀−ρ², t₀; B^s_{p′,1}(B_ρ))`: per level the `L^{p′}` norm on the
/// ball plus the Besov seminorm of the field cut off to the ball, with
/// increments up to `ρ/4`.
pub fn parabolic_besov_norm(f: &Trajectory, cyl: &Cylinder, s: f64, pprime: f64) -> Result<f64> {
    let grid = f.grid();
    cyl.check_inside(grid, 0.0)?;
    let order = SmoothnessOrder::new(s, pprime, 1.0, cyl.radius / 4.0)?;
    let rule = ShellRule::default();
    let mask = Region::Ball(cyl.ball()).mask(&grid.space)?;
    let nodes = cyl.ball().nodes(&grid.space);
    let per_level: Vec<f64> = cyl
        .level_weights(grid)
        .par_iter()
        .map(|&(k, wk)| -> Result<f64> {
            let u = f.level(k);
            let lp = nodes
                .iter()
                .map(|&(i, j)| grid.space.node_weight(i, j) * u.at(i, j).abs().powf(pprime))
                .sum::<f64>()
                .powf(1.0 / pprime);
            let b = besov_masked(&grid.space, u.values(), &mask, &order, &rule)?;
            Ok((lp + b).powf(pprime) * wk)
        })
        .collect::<Result<_>>()?;
    Ok(per_level.iter().sum::<f64>().powf(1.0 / pprime))
}
