//! Scalar profiles and vector fields of the degenerate operator.

mod flux;
mod params;
mod profile;
pub mod quadrature;
mod vector;
mod weight;

pub use flux::{energy, flux, flux_2d, flux_jacobian, flux_jacobian_2d, h_gamma};
pub(crate) use flux::{energy_radial, h_gamma_unchecked};
pub use params::{alpha_floor, default_alpha, DegenParams};
pub use profile::{g_profile, g_profile_by_quadrature, v_map, GProfile};
pub use quadrature::{integrate, Estimate, QuadratureConfig};
pub use vector::AmbientVector;
pub use weight::phi_weight;
