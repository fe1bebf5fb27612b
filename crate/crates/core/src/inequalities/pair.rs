use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{
    h_gamma_unchecked, phi_weight, AmbientVector, DegenParams, GProfile, QuadratureConfig,
};

/// Relative slack applied to every inequality check.
pub const RELATIVE_SLACK: f64 = 1e-9;

/// Both sides of an inequality `lesser ≤ greater`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub lesser: f64,
    pub greater: f64,
}

impl Margin {
    pub fn new(lesser: f64, greater: f64) -> Self {
        Self { lesser, greater }
    }

    /// `greater − lesser`; non-negative when the inequality holds.
    pub fn value(&self) -> f64 {
        self.greater - self.lesser
    }

    pub fn scale(&self) -> f64 {
        self.lesser.abs().max(self.greater.abs())
    }

    /// Margin divided by the larger side, zero when both sides vanish.
    pub fn relative(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            0.0
        } else {
            self.value() / s
        }
    }

    pub fn holds(&self) -> bool {
        self.holds_with(RELATIVE_SLACK)
    }

    pub fn holds_with(&self, slack: f64) -> bool {
        self.value() >= -slack * self.scale()
    }
}

/// Margins of the pairwise inequalities at one `(ξ, η)`.
///
/// `None` marks an inequality whose hypotheses fail at this pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMargins {
    /// `|ξ̂ − η̂| ≤ 2|ξ−η|/|η|`, both vectors nonzero.
    pub unit_vector_margin: Option<Margin>,
    /// `(4/p²)|H_{p/2}(ξ)−H_{p/2}(η)|² ≤ ⟨H_{p−1}(ξ)−H_{p−1}(η), ξ−η⟩`.
    pub monotonicity_4p2_margin: Margin,
    /// `2^{−(p+1)} (|η|−λ)^p/(|η|(|ξ|+|η|)) |ξ−η|² ≤ ⟨H_{p−1}(ξ)−H_{p−1}(η), ξ−η⟩`, for `|η| > λ`.
    pub monotonicity_2p1_margin: Option<Margin>,
    /// `|V(ξ)−V(η)|² ≤ C_p ⟨H_{p−1}(ξ)−H_{p−1}(η), ξ−η⟩`.
    pub v_vs_h_margin: Margin,
    /// `|ξ−η|^p / |V(ξ)−V(η)|²` for `λ = 0`, `p > 2`, `ξ ≠ η`.
    pub lind_ratio: Option<f64>,
}

impl PairMargins {
    /// True when every applicable inequality holds within the slack.
    pub fn all_hold(&self) -> bool {
        self.unit_vector_margin.map_or(true, |m| m.holds())
            && self.monotonicity_4p2_margin.holds()
            && self.monotonicity_2p1_margin.map_or(true, |m| m.holds())
            && self.v_vs_h_margin.holds()
    }
}

/// Margins of the scalar inequalities at one `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMargins {
    /// `G(t) ≤ (2/p) t^{p/2} (t/(t+λ))^{(1+2α)/2}`.
    pub profile_bound: Margin,
    /// `Φ'(t) t ≤ 2α Φ(t)`.
    pub weight_derivative: Margin,
}

/// The constant relating the V-map to the monotonicity of `H_{p−1}`:
/// `C_p = 2 + 2^{p+7}/p²`.
pub fn v_vs_h_constant(p: f64) -> f64 {
    2.0 + 2f64.powf(p + 7.0) / (p * p)
}

/// Evaluates the pairwise inequalities for a fixed parameter set, reusing one
/// profile evaluator across calls.
#[derive(Debug, Clone)]
pub struct PairChecker {
    params: DegenParams,
    profile: GProfile,
    c_p: f64,
}

fn sub_norm_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot_diff(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(c.iter().zip(d))
        .map(|((a, b), (c, d))| (a - b) * (c - d))
        .sum()
}

impl PairChecker {
    /// Builds a checker whose profile is tabulated when no closed form exists.
    pub fn new(params: &DegenParams, quad: &QuadratureConfig) -> Result<Self> {
        Ok(Self {
            params: *params,
            profile: GProfile::tabulated(params, quad)?,
            c_p: v_vs_h_constant(params.p()),
        })
    }

    pub(crate) fn from_profile(profile: GProfile) -> Self {
        let params = *profile.params();
        Self {
            params,
            profile,
            c_p: v_vs_h_constant(params.p()),
        }
    }

    pub fn params(&self) -> &DegenParams {
        &self.params
    }

    pub fn check(&self, xi: &AmbientVector, eta: &AmbientVector) -> Result<PairMargins> {
        if xi.dim() != eta.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                xi.dim(),
                eta.dim()
            )));
        }
        let (p, lambda) = (self.params.p(), self.params.lambda());
        let (x, y) = (xi.as_slice(), eta.as_slice());
        let (rx, ry) = (xi.norm(), eta.norm());
        let diff_sq = sub_norm_sq(x, y);
        let diff = diff_sq.sqrt();

        let unit_vector_margin = (rx > 0.0 && ry > 0.0).then(|| {
            let ux = xi.scaled(1.0 / rx);
            let uy = eta.scaled(1.0 / ry);
            Margin::new(
                sub_norm_sq(ux.as_slice(), uy.as_slice()).sqrt(),
                2.0 * diff / ry,
            )
        });

        let hx = h_gamma_unchecked(xi, p - 1.0, lambda);
        let hy = h_gamma_unchecked(eta, p - 1.0, lambda);
        let mono = dot_diff(hx.as_slice(), hy.as_slice(), x, y);
        let hhx = h_gamma_unchecked(xi, p / 2.0, lambda);
        let hhy = h_gamma_unchecked(eta, p / 2.0, lambda);
        let monotonicity_4p2_margin = Margin::new(
            4.0 / (p * p) * sub_norm_sq(hhx.as_slice(), hhy.as_slice()),
            mono,
        );

        let monotonicity_2p1_margin = (ry > lambda).then(|| {
            let weight = (ry - lambda).powf(p) / (ry * (rx + ry));
            Margin::new(2f64.powf(-(p + 1.0)) * weight * diff_sq, mono)
        });

        let vx = self.profile.v_map(xi)?;
        let vy = self.profile.v_map(eta)?;
        let v_diff_sq = sub_norm_sq(vx.as_slice(), vy.as_slice());
        let v_vs_h_margin = Margin::new(v_diff_sq, self.c_p * mono);

        let lind_ratio = (lambda == 0.0 && p > 2.0 && diff > 0.0 && v_diff_sq > 0.0)
            .then(|| diff.powf(p) / v_diff_sq);

        Ok(PairMargins {
            unit_vector_margin,
            monotonicity_4p2_margin,
            monotonicity_2p1_margin,
            v_vs_h_margin,
            lind_ratio,
        })
    }

    pub fn check_scalar(&self, t: f64) -> Result<ScalarMargins> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidInput(format!(
                "t must be finite and >= 0, got {t}"
            )));
        }
        let (p, lambda, alpha) = (self.params.p(), self.params.lambda(), self.params.alpha());
        let g = self.profile.eval(t)?;
        let bound = if t == 0.0 {
            0.0
        } else {
            2.0 / p * t.powf(p / 2.0) * (t / (t + lambda)).powf((1.0 + 2.0 * alpha) / 2.0)
        };
        let (phi, dphi) = phi_weight(t, &self.params)?;
        Ok(ScalarMargins {
            profile_bound: Margin::new(g, bound),
            weight_derivative: Margin::new(dphi * t, 2.0 * alpha * phi),
        })
    }
}

/// Evaluates the pairwise inequalities at `(ξ, η)`.
pub fn check_pair(
    xi: &AmbientVector,
    eta: &AmbientVector,
    params: &DegenParams,
) -> Result<PairMargins> {
    let profile = GProfile::exact(params, &QuadratureConfig::default())?;
    PairChecker::from_profile(profile).check(xi, eta)
}

/// Evaluates the profile bound and the weight derivative bound at `t`.
pub fn check_scalar(t: f64, params: &DegenParams) -> Result<ScalarMargins> {
    let profile = GProfile::exact(params, &QuadratureConfig::default())?;
    PairChecker::from_profile(profile).check_scalar(t)
}
