//! ε-sweeps of the regularized problem against the uniform estimates.
//!
//! Each row solves the catalog problem with `ε` from the list, the
//! mollified source `f_ε` and the `ε = 0` exact solution as initial and
//! lateral data. The exact solution is also the reference `u` in every
//! distance and bound. Rows are computed in parallel and reported in the
//! order of the list.
//!
//! The unknown constants of the estimates are not modelled; sweeps check
//! that ratios stay within a fixed band across ε or fit decay slopes.

mod report;
mod spec;
mod sweeps;

pub use report::{
    max_min_ratio, tail_slope, Relation, Statistic, SweepKind, SweepReport, SweepRow, ROW_COLUMNS,
};
pub use spec::{NestedCylinders, SweepSpec};
pub use sweeps::{
    run_comparison_sweep, run_energy_sweep, run_fractional_check, run_sobolev_sweep, run_sweep,
    run_time_derivative_check,
};
