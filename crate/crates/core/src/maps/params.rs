use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The quadruple `(p, λ, α, ε)` that drives every nonlinear map and solver.
///
/// * `p` is the growth exponent, `p ≥ 2`.
/// * `lambda` is the degeneracy threshold: the flux vanishes on `{|ξ| ≤ λ}`.
/// * `alpha` is the exponent of the profile used by the V-map. It must be `0`
///   when `λ = 0` and at least [`alpha_floor`] when `λ > 0`.
/// * `eps ∈ [0, 1]` weights the uniformly elliptic regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct DegenParams {
    p: f64,
    lambda: f64,
    alpha: f64,
    eps: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: f64,
    lambda: f64,
    alpha: f64,
    eps: f64,
}

impl TryFrom<RawParams> for DegenParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        DegenParams::new(raw.p, raw.lambda, raw.alpha, raw.eps)
    }
}

impl From<DegenParams> for RawParams {
    fn from(d: DegenParams) -> Self {
        RawParams {
            p: d.p,
            lambda: d.lambda,
            alpha: d.alpha,
            eps: d.eps,
        }
    }
}

/// Smallest admissible `α` for the given `p` and `λ`.
///
/// Zero when `λ = 0`; otherwise `(p+1)/(2(p−1))` for `p > 2` and `3/2` for `p = 2`.
pub fn alpha_floor(p: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else if p == 2.0 {
        1.5
    } else {
        (p + 1.0) / (2.0 * (p - 1.0))
    }
}

/// Default profile exponent: the minimal admissible value.
pub fn default_alpha(p: f64, lambda: f64) -> Result<f64> {
    if !p.is_finite() || p < 2.0 {
        return Err(Error::InvalidInput(format!(
            "p must satisfy p >= 2, got {p}"
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!(
            "lambda must satisfy lambda >= 0, got {lambda}"
        )));
    }
    Ok(alpha_floor(p, lambda))
}

impl DegenParams {
    pub fn new(p: f64, lambda: f64, alpha: f64, eps: f64) -> Result<Self> {
        let failures = Self::violations(p, lambda, alpha, eps);
        if failures.is_empty() {
            Ok(Self {
                p,
                lambda,
                alpha,
                eps,
            })
        } else {
            Err(Error::InvalidParams(failures))
        }
    }

    /// Builds parameters with `α` set to its minimal admissible value.
    pub fn with_default_alpha(p: f64, lambda: f64, eps: f64) -> Result<Self> {
        let alpha = default_alpha(p, lambda)?;
        Self::new(p, lambda, alpha, eps)
    }

    /// Every constraint the quadruple violates, in a human readable form.
    pub fn violations(p: f64, lambda: f64, alpha: f64, eps: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !p.is_finite() || p < 2.0 {
            out.push(format!("p must satisfy p >= 2 (got {p})"));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            out.push(format!("lambda must satisfy lambda >= 0 (got {lambda})"));
        }
        if !eps.is_finite() || !(0.0..=1.0).contains(&eps) {
            out.push(format!("eps must lie in [0, 1] (got {eps})"));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            out.push(format!("alpha must be finite and >= 0 (got {alpha})"));
        } else if lambda == 0.0 && alpha != 0.0 {
            out.push(format!("alpha must be 0 when lambda = 0 (got {alpha})"));
        } else if lambda > 0.0 && p.is_finite() && p >= 2.0 {
            let floor = alpha_floor(p, lambda);
            // Tolerate the rounding of values such as 5/6 typed as decimals.
            if alpha < floor * (1.0 - 1e-12) {
                out.push(format!(
                    "alpha must be >= {floor} for p = {p}, lambda > 0 (got {alpha})"
                ));
            }
        }
        out
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Conjugate exponent `p' = p/(p−1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.p, self.lambda, self.alpha, eps)
    }
}
