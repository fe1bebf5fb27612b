//! The degenerate flux `H_{p−1}`, the regularized energy `A_ε`, its gradient and Hessian.

use nalgebra::DMatrix;

use super::params::DegenParams;
use super::vector::AmbientVector;
use crate::error::{Error, Result};

/// `(x)_+^γ` with the convention `(x)_+^0 = 0` for `x ≤ 0`.
#[inline]
fn positive_power(x: f64, gamma: f64) -> f64 {
    if x > 0.0 {
        x.powf(gamma)
    } else {
        0.0
    }
}

/// `H_γ(ξ) = (|ξ|−λ)_+^γ ξ/|ξ|`, and zero at `ξ = 0`.
pub fn h_gamma(xi: &AmbientVector, gamma: f64, lambda: f64) -> Result<AmbientVector> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    Ok(h_gamma_unchecked(xi, gamma, lambda))
}

pub(crate) fn h_gamma_unchecked(xi: &AmbientVector, gamma: f64, lambda: f64) -> AmbientVector {
    let r = xi.norm();
    if r <= lambda {
        return AmbientVector::zeros(xi.dim());
    }
    xi.scaled(positive_power(r - lambda, gamma) / r)
}

/// `A_ε(ξ) = (1/p)(|ξ|−λ)_+^p + (ε/p)(1+|ξ|²)^{p/2}`.
pub fn energy(xi: &AmbientVector, params: &DegenParams) -> f64 {
    energy_radial(xi.norm(), params)
}

pub(crate) fn energy_radial(r: f64, params: &DegenParams) -> f64 {
    let p = params.p();
    (positive_power(r - params.lambda(), p) + params.eps() * (1.0 + r * r).powf(p / 2.0)) / p
}

/// Coefficients `(c, d)` with `DA_ε(ξ) = c ξ` and
/// `D²A_ε(ξ) = c I + (d − c) ξ̂ ξ̂ᵀ`, where `d` is the second radial derivative.
pub(crate) fn radial_coefficients(r: f64, params: &DegenParams) -> (f64, f64) {
    let (p, lambda, eps) = (params.p(), params.lambda(), params.eps());
    let reg = eps * (1.0 + r * r).powf((p - 2.0) / 2.0);
    if r == 0.0 {
        let linear = if lambda == 0.0 && p == 2.0 { 1.0 } else { 0.0 };
        return (reg + linear, reg + linear);
    }
    let pos = r - lambda;
    let c = positive_power(pos, p - 1.0) / r + reg;
    let d = (p - 1.0) * positive_power(pos, p - 2.0)
        + eps * (1.0 + r * r).powf((p - 4.0) / 2.0) * (1.0 + (p - 1.0) * r * r);
    (c, d)
}

/// The regularized flux `DA_ε(ξ) = H_{p−1}(ξ) + ε(1+|ξ|²)^{(p−2)/2} ξ`.
pub fn flux(xi: &AmbientVector, params: &DegenParams) -> AmbientVector {
    let (c, _) = radial_coefficients(xi.norm(), params);
    xi.scaled(c)
}

/// The Hessian `D²A_ε(ξ)`. Zero for `ε = 0` on the closed ball `|ξ| ≤ λ`.
pub fn flux_jacobian(xi: &AmbientVector, params: &DegenParams) -> DMatrix<f64> {
    let n = xi.dim();
    let r = xi.norm();
    let (c, d) = radial_coefficients(r, params);
    let mut j = DMatrix::from_diagonal_element(n, n, c);
    if r > 0.0 {
        let coef = (d - c) / (r * r);
        for a in 0..n {
            for b in 0..n {
                j[(a, b)] += coef * xi[a] * xi[b];
            }
        }
    }
    j
}

/// Two-dimensional flux for the grid code.
#[inline]
pub fn flux_2d(g: [f64; 2], params: &DegenParams) -> [f64; 2] {
    let (c, _) = radial_coefficients(g[0].hypot(g[1]), params);
    [c * g[0], c * g[1]]
}

/// Two-dimensional Hessian as `[[j00, j01], [j10, j11]]`.
#[inline]
pub fn flux_jacobian_2d(g: [f64; 2], params: &DegenParams) -> [[f64; 2]; 2] {
    let r = g[0].hypot(g[1]);
    let (c, d) = radial_coefficients(r, params);
    if r == 0.0 {
        return [[c, 0.0], [0.0, c]];
    }
    let coef = (d - c) / (r * r);
    let off = coef * g[0] * g[1];
    [[c + coef * g[0] * g[0], off], [off, c + coef * g[1] * g[1]]]
}
