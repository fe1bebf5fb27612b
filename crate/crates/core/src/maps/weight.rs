use super::params::DegenParams;
use crate::error::{Error, Result};

/// The weight `Φ(t) = t^{2α}/(t²+λ²)^α` and its derivative.
///
/// For `λ = 0` the weight is the indicator of `t > 0` with zero derivative.
pub fn phi_weight(t: f64, params: &DegenParams) -> Result<(f64, f64)> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "weight argument must be finite and >= 0, got {t}"
        )));
    }
    let lambda = params.lambda();
    if lambda == 0.0 {
        return Ok((if t > 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let alpha = params.alpha();
    let denom = t * t + lambda * lambda;
    let value = (t * t / denom).powf(alpha);
    let derivative = 2.0 * alpha * lambda * lambda / (t * denom) * value;
    Ok((value, derivative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn special_values() {
        let pr = DegenParams::with_default_alpha(3.0, 1.0, 0.0).unwrap();
        assert_eq!(phi_weight(0.0, &pr).unwrap(), (0.0, 0.0));
        let (v, _) = phi_weight(1.0, &pr).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-15);
        let pr = DegenParams::new(2.5, 0.7, 2.3, 0.0).unwrap();
        let (v, _) = phi_weight(0.7, &pr).unwrap();
        assert_relative_eq!(v, 2f64.powf(-2.3), max_relative = 1e-14);
        assert!(phi_weight(-1.0, &pr).is_err());
        let flat = DegenParams::with_default_alpha(3.0, 0.0, 0.0).unwrap();
        assert_eq!(phi_weight(0.0, &flat).unwrap(), (0.0, 0.0));
        assert_eq!(phi_weight(2.0, &flat).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let pr = DegenParams::new(3.0, 1.5, 1.25, 0.0).unwrap();
        for t in [0.1, 0.8, 1.5, 4.0, 30.0] {
            let h = 1e-6 * t;
            let fd =
                (phi_weight(t + h, &pr).unwrap().0 - phi_weight(t - h, &pr).unwrap().0) / (2.0 * h);
            assert_relative_eq!(phi_weight(t, &pr).unwrap().1, fd, max_relative = 1e-7);
        }
    }

    proptest! {
        #[test]
        fn bounded_and_derivative_controlled(t in 0.0f64..1e3, lambda in 0.01f64..3.0, extra in 0.0f64..4.0) {
            let pr = DegenParams::new(3.0, lambda, 1.0 + extra, 0.0).unwrap();
            let (v, d) = phi_weight(t, &pr).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(d >= 0.0);
            prop_assert!(d * t <= 2.0 * pr.alpha() * v * (1.0 + 1e-12));
        }
    }
}
