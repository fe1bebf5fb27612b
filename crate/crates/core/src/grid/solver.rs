use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::mesh::{ScalarField, SpatialGrid, Trajectory};
use super::operators::{divergence_into, gradient_into};
use super::problems::ProblemSpec;
use crate::error::{Error, Result};
use crate::maps::{energy_radial, flux_2d, flux_jacobian_2d, DegenParams};

/// Controls of the damped Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Target for the grid L² norm of the implicit Euler residual.
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Relative tolerance of the conjugate gradient solve.
    pub linear_tol: f64,
    pub max_linear_iters: usize,
    /// Smallest step of the halving line search.
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            max_iters: 50,
            linear_tol: 1e-10,
            max_linear_iters: 20_000,
            min_step: 2f64.powi(-20),
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let mut failures = Vec::new();
        if !(self.residual_tol > 0.0) {
            failures.push(format!(
                "residual_tol must be positive (got {})",
                self.residual_tol
            ));
        }
        if !(self.linear_tol > 0.0) {
            failures.push(format!(
                "linear_tol must be positive (got {})",
                self.linear_tol
            ));
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            failures.push(format!(
                "min_step must lie in (0, 1] (got {})",
                self.min_step
            ));
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(failures))
        }
    }
}

/// Result of one implicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub u: ScalarField,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    /// Residual norm before each Newton update and after the last one.
    pub residual_history: Vec<f64>,
}

impl StepOutcome {
    pub fn residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("at least the initial residual")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

/// Per-step diagnostics of a time march.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub steps: Vec<StepRecord>,
    pub wall_time_seconds: f64,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn total_newton_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.newton_iterations).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "step",
            "time",
            "newton_iterations",
            "linear_iterations",
            "residual",
        ])?;
        for s in &self.steps {
            wtr.write_record([
                s.step.to_string(),
                s.time.to_string(),
                s.newton_iterations.to_string(),
                s.linear_iterations.to_string(),
                format!("{:e}", s.residual),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Reusable buffers for residual and Jacobian evaluation.
struct Workspace {
    grid: SpatialGrid,
    interior: Vec<usize>,
    grads: Vec<[f64; 2]>,
    fluxes: Vec<[f64; 2]>,
    jac: Vec<[[f64; 2]; 2]>,
    div: Vec<f64>,
}

impl Workspace {
    fn new(grid: SpatialGrid) -> Self {
        let interior = (1..grid.cells())
            .flat_map(|j| (1..grid.cells()).map(move |i| (i, j)))
            .map(|(i, j)| grid.node(i, j))
            .collect();
        let tris = 2 * grid.num_cells();
        Self {
            grid,
            interior,
            grads: vec![[0.0; 2]; tris],
            fluxes: vec![[0.0; 2]; tris],
            jac: vec![[[0.0; 2]; 2]; tris],
            div: vec![0.0; grid.num_nodes()],
        }
    }

    /// Grid L² norm over the interior nodes.
    fn norm(&self, r: &[f64]) -> f64 {
        let h = self.grid.h();
        (self.interior.iter().map(|&n| r[n] * r[n]).sum::<f64>()).sqrt() * h
    }

    /// Implicit Euler residual at interior nodes; zero on the boundary.
    fn residual(
        &mut self,
        u: &[f64],
        prev: &[f64],
        f: &[f64],
        params: &DegenParams,
        tau: f64,
        out: &mut [f64],
    ) {
        gradient_into(&self.grid, u, &mut self.grads);
        for (fl, g) in self.fluxes.iter_mut().zip(&self.grads) {
            *fl = flux_2d(*g, params);
        }
        divergence_into(&self.grid, &self.fluxes, &mut self.div);
        out.iter_mut().for_each(|v| *v = 0.0);
        for &n in &self.interior {
            out[n] = (u[n] - prev[n]) / tau - self.div[n] - f[n];
        }
    }

    /// Stores the flux Jacobian of every triangle at the current gradients.
    fn assemble_jacobian(&mut self, u: &[f64], params: &DegenParams) {
        gradient_into(&self.grid, u, &mut self.grads);
        for (j, g) in self.jac.iter_mut().zip(&self.grads) {
            *j = flux_jacobian_2d(*g, params);
        }
    }

    /// `J v = v/τ − div(D grad v)` on interior nodes, with `v = 0` on the boundary.
    fn apply_jacobian(&mut self, v: &[f64], tau: f64, out: &mut [f64]) {
        gradient_into(&self.grid, v, &mut self.grads);
        for (fl, (g, j)) in self.fluxes.iter_mut().zip(self.grads.iter().zip(&self.jac)) {
            *fl = [
                j[0][0] * g[0] + j[0][1] * g[1],
                j[1][0] * g[0] + j[1][1] * g[1],
            ];
        }
        divergence_into(&self.grid, &self.fluxes, &mut self.div);
        out.iter_mut().for_each(|x| *x = 0.0);
        for &n in &self.interior {
            out[n] = v[n] / tau - self.div[n];
        }
    }

    /// Diagonal of the Jacobian, for Jacobi preconditioning.
    fn jacobian_diagonal(&self, tau: f64) -> Vec<f64> {
        let n = self.grid.cells();
        let s = self.grid.side();
        let h2 = self.grid.h() * self.grid.h();
        let mut diag = vec![0.0; self.grid.num_nodes()];
        let quad = |m: &[[f64; 2]; 2], e: [f64; 2]| {
            e[0] * (m[0][0] * e[0] + m[0][1] * e[1]) + e[1] * (m[1][0] * e[0] + m[1][1] * e[1])
        };
        for j in 0..n {
            for i in 0..n {
                let base = j * s + i;
                let c = 2 * (j * n + i);
                let (lo, up) = (&self.jac[c], &self.jac[c + 1]);
                diag[base] += quad(lo, [-1.0, -1.0]);
                diag[base + 1] += quad(lo, [1.0, 0.0]) + quad(up, [0.0, -1.0]);
                diag[base + s] += quad(lo, [0.0, 1.0]) + quad(up, [-1.0, 0.0]);
                diag[base + s + 1] += quad(up, [1.0, 1.0]);
            }
        }
        diag.iter_mut()
            .for_each(|d| *d = 1.0 / tau + *d / (2.0 * h2));
        diag
    }

    /// Jacobi-preconditioned conjugate gradients for `J x = b`.
    fn solve_linear(
        &mut self,
        b: &[f64],
        tau: f64,
        target: f64,
        max_iters: usize,
    ) -> (Vec<f64>, usize) {
        let nn = b.len();
        let diag = self.jacobian_diagonal(tau);
        let mut x = vec![0.0; nn];
        let mut r = b.to_vec();
        let mut z = vec![0.0; nn];
        let mut ap = vec![0.0; nn];
        let interior = std::mem::take(&mut self.interior);
        for &n in &interior {
            z[n] = r[n] / diag[n];
        }
        let mut p = z.clone();
        let mut rz: f64 = interior.iter().map(|&n| r[n] * z[n]).sum();
        let mut iters = 0;
        self.interior = interior;
        while iters < max_iters && self.norm(&r) > target {
            self.apply_jacobian(&p, tau, &mut ap);
            let pap: f64 = self.interior.iter().map(|&n| p[n] * ap[n]).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for &n in &self.interior {
                x[n] += alpha * p[n];
                r[n] -= alpha * ap[n];
                z[n] = r[n] / diag[n];
            }
            let rz_new: f64 = self.interior.iter().map(|&n| r[n] * z[n]).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for &n in &self.interior {
                p[n] = z[n] + beta * p[n];
            }
            iters += 1;
        }
        (x, iters)
    }
}

/// Discrete energy `Σ_T A_ε(grad u) |T|`.
pub fn discrete_energy(u: &ScalarField, params: &DegenParams) -> f64 {
    let grid = *u.grid();
    let mut grads = vec![[0.0; 2]; 2 * grid.num_cells()];
    gradient_into(&grid, u.values(), &mut grads);
    grads
        .iter()
        .map(|g| energy_radial(g[0].hypot(g[1]), params))
        .sum::<f64>()
        * grid.triangle_area()
}

/// One implicit Euler step `(u − u_curr)/τ − div DA_ε(grad u) = f_level`.
///
/// `guess` is the starting iterate; its boundary values are the Dirichlet
/// data of the new level and are never modified. The nonlinear system is
/// solved by Newton's method with a halving line search on the residual norm;
/// each linear system is symmetric positive definite for `ε > 0` and is
/// solved by preconditioned conjugate gradients.
pub fn solve_timestep(
    u_curr: &ScalarField,
    guess: &ScalarField,
    f_level: &ScalarField,
    params: &DegenParams,
    tau: f64,
    newton: &NewtonConfig,
) -> Result<StepOutcome> {
    newton.validate()?;
    if !(params.eps() > 0.0) {
        return Err(Error::InvalidInput("the solver needs eps > 0".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "time step must be positive, got {tau}"
        )));
    }
    let grid = *u_curr.grid();
    if *guess.grid() != grid || *f_level.grid() != grid {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    let mut ws = Workspace::new(grid);
    let prev = u_curr.values();
    let f = f_level.values();
    let mut u = guess.values().to_vec();
    let mut r = vec![0.0; u.len()];
    let mut trial_r = vec![0.0; u.len()];
    ws.residual(&u, prev, f, params, tau, &mut r);
    let mut norm = ws.norm(&r);
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut linear_iterations = 0;
    while norm > newton.residual_tol {
        if iterations >= newton.max_iters {
            return Err(Error::NonConvergence {
                step: None,
                iterations,
                residual: norm,
            });
        }
        ws.assemble_jacobian(&u, params);
        let b: Vec<f64> = r.iter().map(|v| -v).collect();
        let target = (newton.linear_tol * norm).min(0.1 * newton.residual_tol);
        let (delta, its) = ws.solve_linear(&b, tau, target, newton.max_linear_iters);
        linear_iterations += its;

        let mut step = 1.0;
        let mut trial = u.clone();
        loop {
            for &n in &ws.interior {
                trial[n] = u[n] + step * delta[n];
            }
            ws.residual(&trial, prev, f, params, tau, &mut trial_r);
            let trial_norm = ws.norm(&trial_r);
            if trial_norm <= (1.0 - 1e-4 * step) * norm || step * 0.5 < newton.min_step {
                norm = trial_norm;
                break;
            }
            step *= 0.5;
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut r, &mut trial_r);
        iterations += 1;
        history.push(norm);
        if !norm.is_finite() {
            return Err(Error::NonConvergence {
                step: None,
                iterations,
                residual: norm,
            });
        }
    }
    Ok(StepOutcome {
        u: ScalarField::from_values(grid, u)?,
        newton_iterations: iterations,
        linear_iterations,
        residual_history: history,
    })
}

/// Marches all steps of `spec.grid` from the reference initial slice,
/// imposing the reference values on the lateral boundary at every level.
pub fn solve_cauchy_dirichlet(
    spec: &ProblemSpec,
    newton: &NewtonConfig,
) -> Result<(Trajectory, SolveReport)> {
    let start = Instant::now();
    let grid = spec.grid;
    let space = grid.space;
    let tau = grid.tau();
    let reference = spec.reference.clone();
    let mut levels = vec![ScalarField::from_fn(space, |x, y| {
        reference(x, y, grid.t_start())
    })];
    let mut report = SolveReport::default();
    for k in 0..grid.steps() {
        let t_next = grid.time(k + 1);
        let curr = levels.last().expect("initial level");
        let mut guess = curr.clone();
        {
            let vals = guess.values_mut();
            for j in 0..space.side() {
                for i in 0..space.side() {
                    if space.is_boundary(i, j) {
                        let [x, y] = space.node_position(i, j);
                        vals[space.node(i, j)] = reference(x, y, t_next);
                    }
                }
            }
        }
        let f = spec.source.level(&grid, k + 1)?;
        let outcome =
            solve_timestep(curr, &guess, &f, &spec.params, tau, newton).map_err(|e| match e {
                Error::NonConvergence {
                    iterations,
                    residual,
                    ..
                } => Error::NonConvergence {
                    step: Some(k + 1),
                    iterations,
                    residual,
                },
                other => other,
            })?;
        report.steps.push(StepRecord {
            step: k + 1,
            time: t_next,
            newton_iterations: outcome.newton_iterations,
            linear_iterations: outcome.linear_iterations,
            residual: outcome.residual(),
            residual_history: outcome.residual_history.clone(),
        });
        levels.push(outcome.u);
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((Trajectory::new(grid, levels)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::mesh::SpaceTimeGrid;
    use crate::grid::problems::manufactured_problem;

    fn params(p: f64, lambda: f64, eps: f64) -> DegenParams {
        DegenParams::with_default_alpha(p, lambda, eps).unwrap()
    }

    #[test]
    fn linear_problem_takes_one_newton_iteration() {
        let grid = SpaceTimeGrid::new(1.0, 16, 0.0, 0.01, 4).unwrap();
        let spec = manufactured_problem("heat_sine", grid, params(2.0, 0.0, 1e-8)).unwrap();
        let (_, report) = solve_cauchy_dirichlet(&spec, &NewtonConfig::default()).unwrap();
        for s in &report.steps {
            assert_eq!(s.newton_iterations, 1);
            assert!(s.residual <= 1e-9);
        }
    }

    #[test]
    fn zero_iteration_budget_reports_nonconvergence() {
        let grid = SpaceTimeGrid::new(1.0, 8, 0.0, 0.1, 2).unwrap();
        let spec = manufactured_problem("mms_smooth", grid, params(3.0, 0.0, 0.1)).unwrap();
        let cfg = NewtonConfig {
            max_iters: 0,
            ..Default::default()
        };
        match solve_cauchy_dirichlet(&spec, &cfg) {
            Err(Error::NonConvergence {
                step,
                iterations,
                residual,
            }) => {
                assert_eq!(step, Some(1));
                assert_eq!(iterations, 0);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let grid = SpaceTimeGrid::new(1.0, 8, 0.0, 0.5, 5).unwrap();
        let spec = manufactured_problem("linear_drift", grid, params(3.0, 0.0, 0.1)).unwrap();
        let (traj, _) = solve_cauchy_dirichlet(&spec, &NewtonConfig::default()).unwrap();
        assert!(traj
            .levels()
            .iter()
            .all(|l| l.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn rejects_unregularized_problem() {
        let grid = SpaceTimeGrid::new(1.0, 8, 0.0, 0.5, 5).unwrap();
        let spec = manufactured_problem("cone", grid, params(3.0, 1.0, 0.0)).unwrap();
        assert!(matches!(
            solve_cauchy_dirichlet(&spec, &NewtonConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
