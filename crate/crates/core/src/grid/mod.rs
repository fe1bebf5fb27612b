//! Implicit Euler finite difference solver for the regularized
//! Cauchy–Dirichlet problem on a square.

pub mod io;
mod mesh;
mod mollify;
mod operators;
mod problems;
mod solver;

pub use mesh::{ScalarField, SpaceTimeGrid, SpatialGrid, Trajectory, VectorField};
pub use mollify::{mollify_analytic, mollify_source};
pub use operators::{discrete_divergence, discrete_gradient};
pub use problems::{
    manufactured_problem, ProblemSpec, Source, SpaceTimeFn, SpaceTimeVecFn, CATALOG,
};
pub use solver::{
    discrete_energy, solve_cauchy_dirichlet, solve_timestep, NewtonConfig, SolveReport,
    StepOutcome, StepRecord,
};
