//! Numerical laboratory for widely degenerate parabolic equations
//!
//! ```text
//! ∂ₜu − div H_{p−1}(Du) = f,   H_γ(ξ) = (|ξ|−λ)₊^γ ξ/|ξ|
//! ```
//!
//! and their uniformly elliptic regularizations. The crate provides the
//! nonlinear maps ([`maps`]), a randomized inequality checker
//! ([`inequalities`]), an implicit finite difference solver ([`grid`]),
//! discrete Lebesgue, Sobolev and Besov estimators ([`seminorms`]) and the
//! ε-sweep harness ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod grid;
pub mod inequalities;
pub mod maps;
pub mod seminorms;

pub use error::{Error, Result};
pub use maps::{AmbientVector, DegenParams, GProfile, QuadratureConfig};
