use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform node lattice on the square `[0, L]²` with `N` cells per side.
///
/// Nodes are numbered row by row, `y` outer: node `(i, j)` sits at
/// `(i h, j h)` and has index `j (N+1) + i`. Every square cell is split into a
/// lower triangle with vertices `(i,j), (i+1,j), (i,j+1)` and an upper triangle
/// with vertices `(i+1,j+1), (i,j+1), (i+1,j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    length: f64,
    cells: usize,
}

impl SpatialGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        let mut failures = Vec::new();
        if !(length.is_finite() && length > 0.0) {
            failures.push(format!("domain size must be positive (got {length})"));
        }
        if cells < 4 {
            failures.push(format!("cells per side must be >= 4 (got {cells})"));
        }
        if failures.is_empty() {
            Ok(Self { length, cells })
        } else {
            Err(Error::InvalidParams(failures))
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Nodes per side, `N + 1`.
    pub fn side(&self) -> usize {
        self.cells + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.side() * self.side()
    }

    pub fn num_cells(&self) -> usize {
        self.cells * self.cells
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    #[inline]
    pub fn node_position(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.h();
        [i as f64 * h, j as f64 * h]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Centroid of triangle `tri` (0 lower, 1 upper) of cell `(i, j)`.
    pub fn triangle_centroid(&self, i: usize, j: usize, tri: usize) -> [f64; 2] {
        let h = self.h();
        let (a, b) = if tri == 0 {
            (1.0 / 3.0, 1.0 / 3.0)
        } else {
            (2.0 / 3.0, 2.0 / 3.0)
        };
        [(i as f64 + a) * h, (j as f64 + b) * h]
    }

    /// Trapezoidal quadrature weight of node `(i, j)`: the area of its dual
    /// cell clipped to the square.
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        let edge = |k: usize| if k == 0 || k == self.cells { 0.5 } else { 1.0 };
        edge(i) * edge(j) * self.h() * self.h()
    }

    pub fn triangle_area(&self) -> f64 {
        0.5 * self.h() * self.h()
    }
}

/// A spatial grid together with a uniform time partition of `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub space: SpatialGrid,
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl SpaceTimeGrid {
    pub fn new(length: f64, cells: usize, t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        let mut failures = match SpatialGrid::new(length, cells) {
            Ok(_) => Vec::new(),
            Err(Error::InvalidParams(f)) => f,
            Err(e) => return Err(e),
        };
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            failures.push(format!(
                "time interval must satisfy t_start < t_end (got [{t_start}, {t_end}])"
            ));
        }
        if steps < 1 {
            failures.push("time steps must be >= 1".to_string());
        }
        if !failures.is_empty() {
            return Err(Error::InvalidParams(failures));
        }
        Ok(Self {
            space: SpatialGrid { length, cells },
            t_start,
            t_end,
            steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn levels(&self) -> usize {
        self.steps + 1
    }

    pub fn tau(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, level: usize) -> f64 {
        if level == self.steps {
            self.t_end
        } else {
            self.t_start + level as f64 * self.tau()
        }
    }
}

/// Node values of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "expected {} node values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite node value {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.num_nodes());
        for j in 0..grid.side() {
            for i in 0..grid.side() {
                let [x, y] = grid.node_position(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node(i, j)]
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Piecewise constant vectors on the triangles of the split cells.
///
/// Entry `2·cell + tri` belongs to triangle `tri` (0 lower, 1 upper) of cell
/// `j N + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: SpatialGrid,
    values: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![[0.0; 2]; 2 * grid.num_cells()],
        }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != 2 * grid.num_cells() {
            return Err(Error::InvalidInput(format!(
                "expected {} triangle values, got {}",
                2 * grid.num_cells(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, tri: usize) -> [f64; 2] {
        self.values[2 * (j * self.grid.cells() + i) + tri]
    }

    /// Mean of the two triangle values of cell `(i, j)`.
    pub fn cell_average(&self, i: usize, j: usize) -> [f64; 2] {
        let a = self.at(i, j, 0);
        let b = self.at(i, j, 1);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Applies `f` to every triangle value.
    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn([f64; 2]) -> Result<[f64; 2]>) -> Result<Self> {
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect::<Result<_>>()?,
        })
    }
}

/// Node values at every time level of a [`SpaceTimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: SpaceTimeGrid,
    levels: Vec<ScalarField>,
}

impl Trajectory {
    pub fn new(grid: SpaceTimeGrid, levels: Vec<ScalarField>) -> Result<Self> {
        if levels.len() != grid.levels() {
            return Err(Error::InvalidInput(format!(
                "expected {} time levels, got {}",
                grid.levels(),
                levels.len()
            )));
        }
        if levels.iter().any(|l| *l.grid() != grid.space) {
            return Err(Error::InvalidInput(
                "time level on a different spatial grid".into(),
            ));
        }
        Ok(Self { grid, levels })
    }

    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        Self {
            grid,
            levels: vec![ScalarField::zeros(grid.space); grid.levels()],
        }
    }

    /// Samples `f(x, y, t)` at every node and level.
    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let levels = (0..grid.levels())
            .map(|k| {
                let t = grid.time(k);
                ScalarField::from_fn(grid.space, |x, y| f(x, y, t))
            })
            .collect();
        Self { grid, levels }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn levels(&self) -> &[ScalarField] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &ScalarField {
        &self.levels[k]
    }

    pub fn last(&self) -> &ScalarField {
        self.levels.last().expect("at least one level")
    }

    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            levels: self.levels.iter().map(|l| l.scaled(c)).collect(),
        }
    }
}
