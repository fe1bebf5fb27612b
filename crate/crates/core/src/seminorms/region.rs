use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpaceTimeGrid, SpatialGrid};

/// Relative tolerance for region containment tests.
const FIT: f64 = 1e-9;

/// The closed disc `B_ρ(x₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "ball needs a finite center and positive radius (got {center:?}, {radius})"
            )));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1]) <= self.radius * (1.0 + FIT)
    }

    /// Errors unless the ball, grown by `margin`, lies inside the square.
    pub fn check_inside(&self, grid: &SpatialGrid, margin: f64) -> Result<()> {
        let l = grid.length();
        let tol = FIT * l;
        let reach = self.radius + margin;
        let ok = self
            .center
            .iter()
            .all(|&c| c - reach >= -tol && c + reach <= l + tol);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRegion(format!(
                "ball of radius {} (margin {margin}) around {:?} leaves [0, {l}]²",
                self.radius, self.center
            )))
        }
    }

    /// Indices `(i, j)` of the nodes inside the ball.
    pub fn nodes(&self, grid: &SpatialGrid) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..grid.side() {
            for i in 0..grid.side() {
                if self.contains(grid.node_position(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Spatial region of a whole-space seminorm; outside it the field is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Square,
    Ball(Ball),
}

impl Region {
    pub(crate) fn mask(&self, grid: &SpatialGrid) -> Result<Vec<bool>> {
        match self {
            Region::Square => Ok(vec![true; grid.num_nodes()]),
            Region::Ball(b) => {
                b.check_inside(grid, 0.0)?;
                let mut m = vec![false; grid.num_nodes()];
                for (i, j) in b.nodes(grid) {
                    m[grid.node(i, j)] = true;
                }
                Ok(m)
            }
        }
    }
}

/// Backward parabolic cylinder `Q_ρ(z₀) = B_ρ(x₀) × (t₀ − ρ², t₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub center: [f64; 2],
    pub vertex_time: f64,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(center: [f64; 2], vertex_time: f64, radius: f64) -> Result<Self> {
        Ball::new(center, radius)?;
        if !vertex_time.is_finite() {
            return Err(Error::InvalidRegion(format!(
                "vertex time must be finite (got {vertex_time})"
            )));
        }
        Ok(Self {
            center,
            vertex_time,
            radius,
        })
    }

    /// Cylinder centred in the square with its vertex at the final time.
    pub fn centered(grid: &SpaceTimeGrid, radius: f64) -> Result<Self> {
        let c = 0.5 * grid.space.length();
        Self::new([c, c], grid.t_end(), radius)
    }

    /// The cylinder with the same vertex and radius `radius`.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(self.center, self.vertex_time, radius)
    }

    pub fn ball(&self) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius,
        }
    }

    pub fn t_start(&self) -> f64 {
        self.vertex_time - self.radius * self.radius
    }

    /// `|Q_ρ| = π ρ² · ρ²`.
    pub fn measure(&self) -> f64 {
        std::f64::consts::PI * self.radius.powi(4)
    }

    /// Errors unless the cylinder, with a spatial margin, lies in the grid box.
    pub fn check_inside(&self, grid: &SpaceTimeGrid, margin: f64) -> Result<()> {
        self.ball().check_inside(&grid.space, margin)?;
        let tol = FIT * (grid.t_end() - grid.t_start()).abs().max(1.0);
        if self.t_start() < grid.t_start() - tol || self.vertex_time > grid.t_end() + tol {
            return Err(Error::InvalidRegion(format!(
                "time window ({}, {}) leaves [{}, {}]",
                self.t_start(),
                self.vertex_time,
                grid.t_start(),
                grid.t_end()
            )));
        }
        Ok(())
    }

    /// Levels whose backward interval `(t_{k−1}, t_k]` meets the window,
    /// each with the length of the overlap as its time weight.
    pub fn level_weights(&self, grid: &SpaceTimeGrid) -> Vec<(usize, f64)> {
        let times: Vec<f64> = (0..grid.levels()).map(|k| grid.time(k)).collect();
        overlap_weights(&times, self.t_start(), self.vertex_time)
    }

    /// Indices of [`Cylinder::level_weights`].
    pub fn levels(&self, grid: &SpaceTimeGrid) -> Vec<usize> {
        self.level_weights(grid)
            .into_iter()
            .map(|(k, _)| k)
            .collect()
    }

    /// Levels with `t_k` in the closed window `[t₀ − ρ², t₀]`.
    pub fn closed_levels(&self, grid: &SpaceTimeGrid) -> Vec<usize> {
        let tol = FIT * grid.tau();
        (0..grid.levels())
            .filter(|&k| {
                let t = grid.time(k);
                t >= self.t_start() - tol && t <= self.vertex_time + tol
            })
            .collect()
    }
}

/// Overlaps of `(t_{k−1}, t_k]` with `(a, b]`, dropping negligible slivers.
pub(crate) fn overlap_weights(times: &[f64], a: f64, b: f64) -> Vec<(usize, f64)> {
    let tol = FIT
        * (times.last().unwrap_or(&0.0) - times.first().unwrap_or(&0.0))
            .abs()
            .max(f64::MIN_POSITIVE);
    (1..times.len())
        .filter_map(|k| {
            let w = times[k].min(b) - times[k - 1].max(a);
            (w > tol).then_some((k, w))
        })
        .collect()
}

/// Fractional order `s`, integrability `p` (inner) and `q` (outer, possibly
/// infinite), and the increment cutoff `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessOrder {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub cutoff: f64,
}

impl SmoothnessOrder {
    pub fn new(s: f64, p: f64, q: f64, cutoff: f64) -> Result<Self> {
        let mut failures = Vec::new();
        if !(s > 0.0 && s < 1.0) {
            failures.push(format!("s must lie in (0, 1) (got {s})"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            failures.push(format!("p must lie in [1, inf) (got {p})"));
        }
        if !(q >= 1.0) {
            failures.push(format!("q must lie in [1, inf] (got {q})"));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            failures.push(format!("cutoff must be positive (got {cutoff})"));
        }
        if failures.is_empty() {
            Ok(Self { s, p, q, cutoff })
        } else {
            Err(Error::InvalidParams(failures))
        }
    }
}

/// Quadrature of the increment integral: log-spaced shells and uniform angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRule {
    pub shells_per_decade: usize,
    pub angles: usize,
}

impl Default for ShellRule {
    fn default() -> Self {
        Self {
            shells_per_decade: 8,
            angles: 16,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_levels_follow_backward_intervals() {
        let grid = SpaceTimeGrid::new(2.0, 8, 0.0, 1.0, 10).unwrap();
        let cyl = Cylinder::new([1.0, 1.0], 1.0, 0.3f64.sqrt()).unwrap();
        assert_eq!(cyl.levels(&grid), vec![8, 9, 10]);
        let w: f64 = cyl.level_weights(&grid).iter().map(|l| l.1).sum();
        assert!((w - 0.3).abs() < 1e-14);
        let half = Cylinder::new([1.0, 1.0], 0.95, 0.5).unwrap();
        let lw = half.level_weights(&grid);
        assert_eq!(lw.iter().map(|l| l.0).collect::<Vec<_>>(), vec![8, 9, 10]);
        assert!((lw[0].1 - 0.1).abs() < 1e-14 && (lw[2].1 - 0.05).abs() < 1e-14);
        assert_eq!(cyl.closed_levels(&grid), vec![7, 8, 9, 10]);
        assert!(cyl.check_inside(&grid, 0.0).is_ok());
        assert!(matches!(
            Cylinder::new([1.0, 1.0], 0.1, 0.5)
                .unwrap()
                .check_inside(&grid, 0.0),
            Err(Error::InvalidRegion(_))
        ));
        assert!(matches!(
            Cylinder::new([0.3, 1.0], 1.0, 0.4)
                .unwrap()
                .check_inside(&grid, 0.0),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn invalid_orders_are_listed() {
        match SmoothnessOrder::new(1.5, 0.5, 0.0, -1.0) {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 4),
            other => panic!("{other:?}"),
        }
        assert!(SmoothnessOrder::new(0.5, 2.0, f64::INFINITY, 0.1).is_ok());
    }
}
