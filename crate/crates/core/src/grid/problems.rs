use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::mesh::{ScalarField, SpaceTimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::maps::DegenParams;

/// A function of `(x, y, t)`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A planar vector field of `(x, y, t)`.
pub type SpaceTimeVecFn = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;

/// Right-hand side of the equation.
#[derive(Clone)]
pub enum Source {
    Zero,
    Analytic(SpaceTimeFn),
    /// Node values on every level of the problem grid.
    Sampled(Arc<Trajectory>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => f.write_str("Zero"),
            Source::Analytic(_) => f.write_str("Analytic(..)"),
            Source::Sampled(t) => write!(f, "Sampled({} levels)", t.levels().len()),
        }
    }
}

impl Source {
    /// Source values at time level `k` of `grid`.
    pub fn level(&self, grid: &SpaceTimeGrid, k: usize) -> Result<ScalarField> {
        match self {
            Source::Zero => Ok(ScalarField::zeros(grid.space)),
            Source::Analytic(f) => {
                let t = grid.time(k);
                Ok(ScalarField::from_fn(grid.space, |x, y| f(x, y, t)))
            }
            Source::Sampled(traj) => {
                if traj.grid() != grid {
                    return Err(Error::InvalidInput(
                        "sampled source lives on a different grid".into(),
                    ));
                }
                Ok(traj.level(k).clone())
            }
        }
    }

    /// The source sampled on every level.
    pub fn sample(&self, grid: &SpaceTimeGrid) -> Result<Trajectory> {
        let levels = (0..grid.levels())
            .map(|k| self.level(grid, k))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(*grid, levels)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }
}

/// A Cauchy–Dirichlet problem on the grid box.
///
/// `reference` supplies the initial slice and the lateral boundary values;
/// `exact`, when present, is a known solution of the continuum problem and
/// `exact_gradient` its spatial gradient.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub grid: SpaceTimeGrid,
    pub params: DegenParams,
    pub source: Source,
    pub reference: SpaceTimeFn,
    pub exact: Option<SpaceTimeFn>,
    pub exact_gradient: Option<SpaceTimeVecFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("source", &self.source)
            .field("exact", &self.exact.is_some())
            .field("exact_gradient", &self.exact_gradient.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_params(mut self, params: DegenParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_grid(mut self, grid: SpaceTimeGrid) -> Self {
        self.grid = grid;
        self
    }

    /// The reference function sampled on the grid.
    pub fn reference_trajectory(&self) -> Trajectory {
        let r = self.reference.clone();
        Trajectory::from_fn(self.grid, move |x, y, t| r(x, y, t))
    }

    pub fn exact_trajectory(&self) -> Option<Trajectory> {
        self.exact
            .as_ref()
            .map(|e| Trajectory::from_fn(self.grid, |x, y, t| e(x, y, t)))
    }
}

/// Names accepted by [`manufactured_problem`].
pub const CATALOG: [&str; 4] = ["heat_sine", "linear_drift", "cone", "mms_smooth"];

/// `div H_{p−1}(Du)` for a smooth `u` given its gradient `g`, Hessian
/// entries `(uxx, uxy, uyy)`.
///
/// With `ψ(r) = (r−λ)₊^{p−1}` and `a = ψ/r` the flux is `a(|g|) g`, whose
/// divergence is `a Δu + (a'(r)/r) gᵀ D²u g`.
pub(crate) fn div_h_smooth(p: f64, lambda: f64, g: [f64; 2], hess: [f64; 3]) -> f64 {
    let [uxx, uxy, uyy] = hess;
    let lap = uxx + uyy;
    let r = g[0].hypot(g[1]);
    if r == 0.0 {
        let a0 = if p == 2.0 && lambda == 0.0 { 1.0 } else { 0.0 };
        return a0 * lap;
    }
    let pos = r - lambda;
    if pos <= 0.0 {
        return 0.0;
    }
    let psi = pos.powf(p - 1.0);
    let dpsi = (p - 1.0) * pos.powf(p - 2.0);
    let a = psi / r;
    let da = (dpsi * r - psi) / (r * r);
    let quad = g[0] * g[0] * uxx + 2.0 * g[0] * g[1] * uxy + g[1] * g[1] * uyy;
    a * lap + da / r * quad
}

/// Builds a catalog problem on `grid` with `params`.
///
/// * `heat_sine`: `u = e^{−2(1+ε)π²t/L²} sin(πx/L) sin(πy/L)`, `f = 0`; needs `p = 2`, `λ = 0`.
/// * `linear_drift`: `u = (λ/2) x`, `f = 0`; stationary.
/// * `cone`: `u = λ |x − x₀|` with `x₀` half a cell off the central node, `f = 0`.
/// * `mms_smooth`: `u = (1+t) sin(πx/L) sin(πy/L)`, `f = ∂ₜu − div H_{p−1}(Du)`.
pub fn manufactured_problem(
    name: &str,
    grid: SpaceTimeGrid,
    params: DegenParams,
) -> Result<ProblemSpec> {
    let l = grid.space.length();
    let k = PI / l;
    let (p, lambda, eps) = (params.p(), params.lambda(), params.eps());
    let (reference, gradient, source): (SpaceTimeFn, SpaceTimeVecFn, Source) = match name {
        "heat_sine" => {
            if p != 2.0 || lambda != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "heat_sine needs p = 2 and lambda = 0 (got p = {p}, lambda = {lambda})"
                )));
            }
            let rate = 2.0 * (1.0 + eps) * k * k;
            (
                Arc::new(move |x, y, t| (-rate * t).exp() * (k * x).sin() * (k * y).sin()),
                Arc::new(move |x, y, t| {
                    let a = (-rate * t).exp() * k;
                    [
                        a * (k * x).cos() * (k * y).sin(),
                        a * (k * x).sin() * (k * y).cos(),
                    ]
                }),
                Source::Zero,
            )
        }
        "linear_drift" => {
            let a = 0.5 * lambda;
            (
                Arc::new(move |x, _, _| a * x),
                Arc::new(move |_, _, _| [a, 0.0]),
                Source::Zero,
            )
        }
        "cone" => {
            let shift = 0.5 * grid.space.h();
            let (x0, y0) = (0.5 * l + shift, 0.5 * l + shift);
            (
                Arc::new(move |x, y, _| lambda * (x - x0).hypot(y - y0)),
                Arc::new(move |x, y, _| {
                    let r = (x - x0).hypot(y - y0);
                    if r == 0.0 {
                        [0.0, 0.0]
                    } else {
                        [lambda * (x - x0) / r, lambda * (y - y0) / r]
                    }
                }),
                Source::Zero,
            )
        }
        "mms_smooth" => {
            let f = move |x: f64, y: f64, t: f64| {
                let (sx, cx) = (k * x).sin_cos();
                let (sy, cy) = (k * y).sin_cos();
                let a = 1.0 + t;
                let g = [a * k * cx * sy, a * k * sx * cy];
                let hess = [
                    -a * k * k * sx * sy,
                    a * k * k * cx * cy,
                    -a * k * k * sx * sy,
                ];
                sx * sy - div_h_smooth(p, lambda, g, hess)
            };
            (
                Arc::new(move |x, y, t| (1.0 + t) * (k * x).sin() * (k * y).sin()),
                Arc::new(move |x, y, t| {
                    let a = (1.0 + t) * k;
                    [
                        a * (k * x).cos() * (k * y).sin(),
                        a * (k * x).sin() * (k * y).cos(),
                    ]
                }),
                Source::Analytic(Arc::new(f)),
            )
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(ProblemSpec {
        name: name.to_string(),
        grid,
        params,
        source,
        exact: Some(reference.clone()),
        exact_gradient: Some(gradient),
        reference,
    })
}
