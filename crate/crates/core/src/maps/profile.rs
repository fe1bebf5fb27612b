//! The profile `G_{α,λ}(t) = ∫₀ᵗ ω^{(p−1+2α)/2} (ω+λ)^{−(1+2α)/2} dω` and the
//! V-map built on it.

use super::params::DegenParams;
use super::quadrature::{gauss_legendre10, integrate, QuadratureConfig};
use super::vector::AmbientVector;
use crate::error::{Error, Result};

/// Largest `m = α + 1/2` for which the `p = 2` antiderivative is used.
/// Beyond it the alternating sum loses too many digits.
const MAX_CLOSED_FORM_ORDER: u32 = 6;

#[derive(Debug, Clone, Copy)]
struct Exponents {
    /// Exponent of `ω` in the numerator.
    num: f64,
    /// Exponent of `ω + λ` in the denominator.
    den: f64,
}

impl Exponents {
    fn of(params: &DegenParams) -> Self {
        let alpha = params.alpha();
        Self {
            num: (params.p() - 1.0 + 2.0 * alpha) / 2.0,
            den: (1.0 + 2.0 * alpha) / 2.0,
        }
    }

    fn integrand(&self, omega: f64, lambda: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        if lambda == 0.0 {
            omega.powf(self.num - self.den)
        } else {
            omega.powf(self.num) / (omega + lambda).powf(self.den)
        }
    }

    /// Exponent of the leading power of the integrand at `ω = 0`.
    fn leading(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            self.num - self.den
        } else {
            self.num
        }
    }
}

fn check_argument(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "profile argument must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

/// `m` such that `α = m − 1/2`, when `p = 2` and `α` is a half integer.
fn half_integer_order(params: &DegenParams) -> Option<u32> {
    if params.p() != 2.0 || params.lambda() == 0.0 {
        return None;
    }
    let twice = 2.0 * params.alpha();
    if twice.fract() != 0.0 || twice < 1.0 {
        return None;
    }
    let twice = twice as u32;
    (twice % 2 == 1 && twice / 2 < MAX_CLOSED_FORM_ORDER).then_some(twice / 2 + 1)
}

/// `∫₀ˣ (w/(1+w))^m dw`, the `p = 2`, `α = m − 1/2` profile at `λ = 1`.
fn half_integer_antiderivative(m: u32, x: f64) -> f64 {
    if x < 0.5 {
        // (1+w)^{-m} = Σ (−1)^k C(m+k−1, k) w^k, integrated termwise.
        let mf = m as f64;
        let lead = x.powi(m as i32 + 1);
        let mut coeff = 1.0;
        let mut sum = lead / (mf + 1.0);
        for k in 1..200 {
            let kf = k as f64;
            coeff *= -(mf + kf - 1.0) / kf * x;
            let term = coeff * lead / (mf + kf + 1.0);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // Expand ((v−1)/v)^m in powers of 1/v with v = 1 + w.
        let mf = m as f64;
        let mut sum = x - mf * x.ln_1p();
        let mut binom = mf;
        let v = 1.0 + x;
        for j in 2..=m {
            let jf = j as f64;
            binom *= (mf - jf + 1.0) / jf;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * (1.0 - v.powi(1 - j as i32)) / (jf - 1.0);
        }
        sum
    }
}

/// Power series of the profile about `t = 0`, valid for `t < λ`.
fn small_argument_series(exps: Exponents, lambda: f64, t: f64) -> f64 {
    let x = t / lambda;
    let prefactor = lambda.powf(exps.num - exps.den + 1.0);
    let lead = x.powf(exps.num + 1.0);
    let mut coeff = 1.0;
    let mut sum = lead / (exps.num + 1.0);
    for k in 1..400 {
        let kf = k as f64;
        coeff *= -(exps.den + kf - 1.0) / kf * x;
        let term = coeff * lead / (exps.num + kf + 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    prefactor * sum
}

/// Evaluates the profile by adaptive quadrature, regardless of closed forms.
///
/// When the integrand's leading exponent at zero is below one, the substitution
/// `ω = s²` is applied first.
pub fn g_profile_by_quadrature(
    t: f64,
    params: &DegenParams,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_argument(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let exps = Exponents::of(params);
    let lambda = params.lambda();
    let head = if lambda > 0.0 { t.min(lambda) } else { t };
    let mut total = if exps.leading(lambda) < 1.0 {
        integrate(
            |s| 2.0 * s * exps.integrand(s * s, lambda),
            0.0,
            head.sqrt(),
            quad,
        )?
        .value
    } else {
        integrate(|w| exps.integrand(w, lambda), 0.0, head, quad)?.value
    };
    total += geometric_panels(exps, lambda, head, t, quad)?;
    Ok(total)
}

/// Integral over `[lo, t]` on panels growing by a factor 8.
///
/// Past λ the integrand is nearly affine with an O(λ/ω) correction that a
/// single long panel under-samples.
fn geometric_panels(
    exps: Exponents,
    lambda: f64,
    mut lo: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let mut total = 0.0;
    while lo < t {
        let hi = (8.0 * lo).min(t);
        total += integrate(|w| exps.integrand(w, lambda), lo, hi, quad)?.value;
        lo = hi;
    }
    Ok(total)
}

/// The profile `G_{α,λ}(t)` for `t ≥ 0`.
///
/// Uses `(2/p) t^{p/2}` when `λ = 0`, the antiderivative of `(ω/(ω+λ))^m`
/// when `p = 2` and `α = m − 1/2`, and adaptive quadrature otherwise.
pub fn g_profile(t: f64, params: &DegenParams, quad: &QuadratureConfig) -> Result<f64> {
    check_argument(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if params.lambda() == 0.0 {
        let p = params.p();
        return Ok(2.0 / p * t.powf(p / 2.0));
    }
    if let Some(m) = half_integer_order(params) {
        let lambda = params.lambda();
        return Ok(lambda * half_integer_antiderivative(m, t / lambda));
    }
    g_profile_by_quadrature(t, params, quad)
}

/// The V-map: `G((|ξ|−λ)₊) ξ/|ξ|` outside the ball of radius `λ`, zero inside.
pub fn v_map(
    xi: &AmbientVector,
    params: &DegenParams,
    quad: &QuadratureConfig,
) -> Result<AmbientVector> {
    let r = xi.norm();
    if r <= params.lambda() {
        return Ok(AmbientVector::zeros(xi.dim()));
    }
    let g = g_profile(r - params.lambda(), params, quad)?;
    Ok(xi.scaled(g / r))
}

#[derive(Debug, Clone)]
struct Table {
    /// Knots `t_k` on a geometric ladder.
    knots: Vec<f64>,
    /// `G(t_k)`.
    cumulative: Vec<f64>,
    log_first: f64,
    per_decade: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    PowerLaw,
    HalfInteger(u32),
    Direct,
    Table(Table),
}

/// A profile evaluator bound to one parameter set.
///
/// [`GProfile::tabulated`] precomputes `G` on a geometric ladder of knots by
/// adaptive quadrature; evaluation adds a 10-point Gauss rule over the short
/// gap to the nearest knot below. This keeps full double precision while
/// costing a handful of integrand evaluations, which the inequality campaign
/// and the seminorm estimators need.
#[derive(Debug, Clone)]
pub struct GProfile {
    params: DegenParams,
    quad: QuadratureConfig,
    exps: Exponents,
    kind: Kind,
}

impl GProfile {
    const FIRST_KNOT: f64 = 1e-6;
    const LAST_KNOT: f64 = 1e9;
    const PER_DECADE: usize = 32;

    /// Closed form when one exists, per-call adaptive quadrature otherwise.
    pub fn exact(params: &DegenParams, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let kind = Self::closed_kind(params).unwrap_or(Kind::Direct);
        Ok(Self {
            params: *params,
            quad: *quad,
            exps: Exponents::of(params),
            kind,
        })
    }

    /// Closed form when one exists, tabulated quadrature otherwise.
    pub fn tabulated(params: &DegenParams, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let exps = Exponents::of(params);
        let kind = match Self::closed_kind(params) {
            Some(k) => k,
            None => Kind::Table(Self::build_table(params, quad, exps)?),
        };
        Ok(Self {
            params: *params,
            quad: *quad,
            exps,
            kind,
        })
    }

    fn closed_kind(params: &DegenParams) -> Option<Kind> {
        if params.lambda() == 0.0 {
            Some(Kind::PowerLaw)
        } else {
            half_integer_order(params).map(Kind::HalfInteger)
        }
    }

    fn build_table(
        params: &DegenParams,
        quad: &QuadratureConfig,
        exps: Exponents,
    ) -> Result<Table> {
        let lambda = params.lambda();
        let decades = (Self::LAST_KNOT / Self::FIRST_KNOT).log10().round() as usize;
        let count = decades * Self::PER_DECADE + 1;
        let knots: Vec<f64> = (0..count)
            .map(|k| lambda * Self::FIRST_KNOT * 10f64.powf(k as f64 / Self::PER_DECADE as f64))
            .collect();
        let mut cumulative = Vec::with_capacity(count);
        cumulative.push(small_argument_series(exps, lambda, knots[0]));
        for w in knots.windows(2) {
            let piece = integrate(|om| exps.integrand(om, lambda), w[0], w[1], quad)?.value;
            let last = *cumulative.last().expect("seeded");
            cumulative.push(last + piece);
        }
        Ok(Table {
            log_first: knots[0].log10(),
            knots,
            cumulative,
            per_decade: Self::PER_DECADE as f64,
        })
    }

    pub fn params(&self) -> &DegenParams {
        &self.params
    }

    /// `G_{α,λ}(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_argument(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let lambda = self.params.lambda();
        match &self.kind {
            Kind::PowerLaw => {
                let p = self.params.p();
                Ok(2.0 / p * t.powf(p / 2.0))
            }
            Kind::HalfInteger(m) => Ok(lambda * half_integer_antiderivative(*m, t / lambda)),
            Kind::Direct => g_profile_by_quadrature(t, &self.params, &self.quad),
            Kind::Table(table) => {
                let last = table.knots.len() - 1;
                if t < table.knots[0] {
                    return Ok(small_argument_series(self.exps, lambda, t));
                }
                if t >= table.knots[last] {
                    let tail =
                        geometric_panels(self.exps, lambda, table.knots[last], t, &self.quad)?;
                    return Ok(table.cumulative[last] + tail);
                }
                let mut k = (((t.log10() - table.log_first) * table.per_decade)
                    .floor()
                    .max(0.0) as usize)
                    .min(last - 1);
                while k > 0 && table.knots[k] > t {
                    k -= 1;
                }
                while k + 1 < last && table.knots[k + 1] <= t {
                    k += 1;
                }
                let gap = gauss_legendre10(|om| self.exps.integrand(om, lambda), table.knots[k], t);
                Ok(table.cumulative[k] + gap)
            }
        }
    }

    pub fn v_map(&self, xi: &AmbientVector) -> Result<AmbientVector> {
        let r = xi.norm();
        if r <= self.params.lambda() {
            return Ok(AmbientVector::zeros(xi.dim()));
        }
        let g = self.eval(r - self.params.lambda())?;
        Ok(xi.scaled(g / r))
    }

    /// Two-dimensional V-map for the grid code.
    pub fn v_map_2d(&self, xi: [f64; 2]) -> Result<[f64; 2]> {
        let r = xi[0].hypot(xi[1]);
        if r <= self.params.lambda() {
            return Ok([0.0, 0.0]);
        }
        let s = self.eval(r - self.params.lambda())? / r;
        Ok([xi[0] * s, xi[1] * s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Textbook antiderivative of ω²/(ω+λ)², kept independent of the library path.
    fn p2_alpha32_oracle(t: f64, lambda: f64) -> f64 {
        t + lambda - lambda * lambda / (t + lambda) - 2.0 * lambda * (1.0 + t / lambda).ln()
    }

    #[test]
    fn power_law_without_threshold() {
        let params = DegenParams::with_default_alpha(3.0, 0.0, 0.0).unwrap();
        let g = g_profile(4.0, &params, &quad()).unwrap();
        assert_relative_eq!(g, 2.0 / 3.0 * 8.0, max_relative = 1e-15);
        assert_eq!(g_profile(0.0, &params, &quad()).unwrap(), 0.0);
    }

    #[test]
    fn p2_closed_form_value() {
        let params = DegenParams::with_default_alpha(2.0, 1.0, 0.0).unwrap();
        let g = g_profile(1.0, &params, &quad()).unwrap();
        assert_relative_eq!(g, 1.5 - 2.0 * 2f64.ln(), max_relative = 1e-14);
        assert!((g - 0.1137056).abs() < 1e-7);
        assert_relative_eq!(g, p2_alpha32_oracle(1.0, 1.0), max_relative = 1e-14);
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        for alpha in [1.5, 2.5, 3.5] {
            let params = DegenParams::new(2.0, 0.7, alpha, 0.0).unwrap();
            for t in [1e-4, 0.01, 0.3, 0.35, 0.36, 1.0, 7.0, 300.0] {
                let closed = g_profile(t, &params, &quad()).unwrap();
                let numeric = g_profile_by_quadrature(t, &params, &quad()).unwrap();
                assert_relative_eq!(closed, numeric, max_relative = 1e-11);
            }
        }
        for p in [2.0, 2.5, 3.0, 4.0] {
            let params = DegenParams::with_default_alpha(p, 0.0, 0.0).unwrap();
            for t in [1e-6, 0.5, 3.0, 1e5] {
                let closed = g_profile(t, &params, &quad()).unwrap();
                let numeric = g_profile_by_quadrature(t, &params, &quad()).unwrap();
                assert_relative_eq!(closed, numeric, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_negative_argument() {
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            g_profile(-1.0, &params, &quad()),
            Err(Error::InvalidInput(_))
        ));
        assert!(g_profile(f64::NAN, &params, &quad()).is_err());
    }

    #[test]
    fn quadrature_failure_propagates() {
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        let tight = QuadratureConfig {
            abs_tol: 1e-300,
            rel_tol: 1e-16,
            max_subdivisions: 1,
        };
        assert!(matches!(
            g_profile(1e6, &params, &tight),
            Err(Error::QuadratureFailure { .. })
        ));
    }

    #[test]
    fn tabulated_matches_direct_quadrature() {
        for (p, lambda) in [(2.5, 0.5), (3.0, 1.0), (4.0, 2.0), (3.0, 1e-3)] {
            let params = DegenParams::with_default_alpha(p, lambda, 0.0).unwrap();
            let table = GProfile::tabulated(&params, &quad()).unwrap();
            for t in [
                1e-12, 3e-9, 1e-7, 1e-4, 0.013, 0.5, 1.0, 2.2, 97.0, 1e4, 5e6, 3e9,
            ] {
                let fast = table.eval(t).unwrap();
                let slow = g_profile_by_quadrature(t, &params, &quad()).unwrap();
                assert_relative_eq!(fast, slow, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn monotone_and_below_power_bound() {
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        let table = GProfile::tabulated(&params, &quad()).unwrap();
        let mut prev = 0.0;
        for k in 0..400 {
            let t = 1e-5 * 1.05f64.powi(k);
            let g = table.eval(t).unwrap();
            assert!(g >= prev);
            let bound = 2.0 / 3.0 * t.powf(1.5) * (t / (t + 1.0)).powf(1.5);
            assert!(g <= bound * (1.0 + 1e-12));
            prev = g;
        }
    }

    #[test]
    fn v_map_examples() {
        let q = quad();
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        let v = v_map(&AmbientVector::xy(0.6, 0.8), &params, &q).unwrap();
        assert!(v.is_zero());
        let p4 = DegenParams::with_default_alpha(4.0, 0.0, 0.0).unwrap();
        let v = v_map(&AmbientVector::xy(1.0, 0.0), &p4, &q).unwrap();
        assert_relative_eq!(v[0], 0.5, max_relative = 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn v_map_is_rotation_equivariant() {
        let q = quad();
        let params = DegenParams::with_default_alpha(2.5, 0.5, 0.0).unwrap();
        let xi = AmbientVector::xy(1.3, -0.4);
        let v = v_map(&xi, &params, &q).unwrap();
        for theta in [0.3f64, 1.7, -2.4] {
            let (s, c) = theta.sin_cos();
            let rot =
                |a: &AmbientVector| AmbientVector::xy(c * a[0] - s * a[1], s * a[0] + c * a[1]);
            let lhs = v_map(&rot(&xi), &params, &q).unwrap();
            let rhs = rot(&v);
            assert!((&lhs - &rhs).norm() < 1e-13 * v.norm());
        }
    }
}
