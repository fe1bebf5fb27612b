//! Discrete norms and seminorms over parabolic cylinders.
//!
//! Space integrals use node (or triangle) values with a ball mask by centre
//! inclusion; time integrals use the backward rectangle rule of the implicit
//! Euler levels. Whole-space seminorms extend the field by zero outside its
//! region.

mod differences;
mod fractional;
mod lebesgue;
mod nikolskii;
mod region;
mod vfield;

pub use differences::{finite_difference, Difference};
pub use fractional::{
    besov_seminorm, besov_seminorm_with, gagliardo_seminorm, parabolic_besov_norm,
};
pub use lebesgue::{lp_norm_cylinder, sup_l2_in_time};
pub use nikolskii::{nikolskii_fit, LatticeSeries, NikolskiiFit};
pub use region::{Ball, Cylinder, Region, ShellRule, SmoothnessOrder};
pub use vfield::grad_l2_of_v;

pub(crate) use lebesgue::triangle_integral;
pub(crate) use nikolskii::least_squares_slope;
