use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{NewtonConfig, SpaceTimeGrid, CATALOG};
use crate::maps::DegenParams;
use crate::seminorms::Cylinder;

/// Three backward cylinders `Q_r ⊂ Q_ρ ⊂ Q_R` sharing the vertex `(x₀, t₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedCylinders {
    pub center: [f64; 2],
    pub vertex_time: f64,
    pub r: f64,
    pub rho: f64,
    pub big_r: f64,
}

impl NestedCylinders {
    /// Radii `0.2 L`, `0.3 L`, `0.4 L` centred in the square, vertex at the final time.
    pub fn centered(grid: &SpaceTimeGrid) -> Self {
        let l = grid.space.length();
        Self {
            center: [0.5 * l, 0.5 * l],
            vertex_time: grid.t_end(),
            r: 0.2 * l,
            rho: 0.3 * l,
            big_r: 0.4 * l,
        }
    }

    pub fn cylinder(&self, radius: f64) -> Result<Cylinder> {
        Cylinder::new(self.center, self.vertex_time, radius)
    }
}

/// An ε-sweep over one catalog problem.
///
/// The `eps` stored in `params` is ignored; each row uses its own entry of
/// `eps_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub problem: String,
    pub params: DegenParams,
    pub eps_list: Vec<f64>,
    pub grid: SpaceTimeGrid,
    pub cylinders: NestedCylinders,
    pub newton: NewtonConfig,
}

impl SweepSpec {
    /// A sweep with the default nested cylinders and Newton settings.
    pub fn new(
        problem: &str,
        params: DegenParams,
        eps_list: Vec<f64>,
        grid: SpaceTimeGrid,
    ) -> Self {
        Self {
            problem: problem.to_string(),
            params,
            eps_list,
            grid,
            cylinders: NestedCylinders::centered(&grid),
            newton: NewtonConfig::default(),
        }
    }

    /// `N` cells and `N` time steps on `[0, (0.4 L)²]`, so that the default
    /// `Q_R` spans the whole time interval.
    pub fn default_grid(length: f64, cells: usize) -> Result<SpaceTimeGrid> {
        let big_r = 0.4 * length;
        SpaceTimeGrid::new(length, cells, 0.0, big_r * big_r, cells)
    }

    /// Every violated constraint, in one error.
    pub fn validate(&self) -> Result<()> {
        let mut failures = Vec::new();
        if !CATALOG.contains(&self.problem.as_str()) {
            failures.push(format!(
                "unknown problem '{}' (catalog: {})",
                self.problem,
                CATALOG.join(", ")
            ));
        }
        for (k, &e) in self.eps_list.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) {
                failures.push(format!("eps_list[{k}] = {e} is outside (0, 1]"));
            }
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            failures.push("eps_list must be strictly decreasing".into());
        }
        let c = &self.cylinders;
        if !(c.r > 0.0 && c.r < c.rho && c.rho < c.big_r) {
            failures.push(format!(
                "radii must satisfy 0 < r < rho < R (got {}, {}, {})",
                c.r, c.rho, c.big_r
            ));
        }
        match c.cylinder(c.big_r) {
            Ok(q) => {
                if let Err(e) = q.check_inside(&self.grid, self.grid.space.h()) {
                    failures.push(format!(
                        "Q_R must lie inside the grid with a one-cell margin: {e}"
                    ));
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
        if let Err(e) = self.newton.validate() {
            failures.push(e.to_string());
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Configuration(failures.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SweepSpec {
        let grid = SweepSpec::default_grid(1.0, 16).unwrap();
        let params = DegenParams::with_default_alpha(3.0, 0.0, 0.0).unwrap();
        SweepSpec::new("mms_smooth", params, vec![1e-1, 1e-2], grid)
    }

    #[test]
    fn default_spec_is_valid() {
        spec().validate().unwrap();
        assert!((spec().grid.t_end() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn all_failures_are_collected() {
        let mut s = spec();
        s.problem = "nope".into();
        s.eps_list = vec![1e-2, 1e-1, 2.0];
        s.cylinders.rho = 0.5;
        let Err(Error::Configuration(msg)) = s.validate() else {
            panic!("expected a configuration error");
        };
        for needle in [
            "unknown problem",
            "outside (0, 1]",
            "strictly decreasing",
            "0 < r < rho < R",
        ] {
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn cylinder_must_fit() {
        let mut s = spec();
        s.cylinders.big_r = 0.49;
        assert!(s.validate().is_err());
        s.cylinders.big_r = 0.4;
        s.cylinders.vertex_time = 0.1;
        assert!(s.validate().is_err());
    }
}
