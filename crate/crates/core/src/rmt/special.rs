//! Tricomi's confluent hypergeometric function `U(a, b, x)`.
//!
//! Evaluated from `U = Γ(a)⁻¹ ∫₀^∞ e^{-xt} t^{a-1} (1+t)^{b-a-1} dt` after the
//! substitution `t = eˢ`. The log-integrand
//! `φ(s) = -x eˢ + a s + (b-a-1) ln(1+eˢ)` is unimodal for `a > 0`, so the
//! integral is taken around its peak with the peak value factored out, and
//! the result is assembled in log space. This keeps `Γ(a)` for `a ≈ 80` and
//! arguments of several hundred well inside double range.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Relative accuracy demanded from the quadrature.
const REL_TOL: f64 = 1e-13;
/// Depth below the peak (in log units) at which the integrand is cut.
const TAIL_DEPTH: f64 = 60.0;

fn ln_1p_exp(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn logistic(s: f64) -> f64 {
    if s > 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

struct LogIntegrand {
    a: f64,
    c: f64,
    x: f64,
}

impl LogIntegrand {
    fn value(&self, s: f64) -> f64 {
        let grow = if self.c == 0.0 { 0.0 } else { self.c * ln_1p_exp(s) };
        -self.x * s.exp() + self.a * s + grow
    }

    fn slope(&self, s: f64) -> f64 {
        -self.x * s.exp() + self.a + self.c * logistic(s)
    }
}

/// `ln U(a, b, x)` for `a > 0`, `x > 0`.
pub fn ln_tricomi_u(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return Err(Error::Domain(format!("U({a}, {b}, {x}): non-finite argument")));
    }
    if a <= 0.0 || x <= 0.0 {
        return Err(Error::Domain(format!("U({a}, {b}, {x}) needs a > 0 and x > 0")));
    }
    let phi = LogIntegrand { a, c: b - a - 1.0, x };

    // peak: φ' decreases from a > 0 at -∞ to -∞ at +∞ past at most one maximum
    let guess = (a / x).ln();
    let mut lo = guess - 1.0;
    while phi.slope(lo) <= 0.0 {
        lo -= 2.0 * (guess - lo).abs().max(1.0);
    }
    let mut hi = guess + 1.0;
    while phi.slope(hi) >= 0.0 {
        hi += 2.0 * (hi - guess).abs().max(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi.slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak = 0.5 * (lo + hi);
    let top = phi.value(peak);

    let mut step = 1.0;
    let mut left = peak - step;
    while top - phi.value(left) < TAIL_DEPTH {
        step *= 2.0;
        left = peak - step;
    }
    step = 1.0;
    let mut right = peak + step;
    while top - phi.value(right) < TAIL_DEPTH {
        step *= 2.0;
        right = peak + step;
    }

    let opts = QuadOptions { abs_tol: 0.0, rel_tol: REL_TOL, max_intervals: 4000 };
    let q = integrate(|s| (phi.value(s) - top).exp(), left, peak, opts)?;
    let r = integrate(|s| (phi.value(s) - top).exp(), peak, right, opts)?;
    let integral = q.value + r.value;
    if !(integral > 0.0) || (q.error + r.error) > 1e-10 * integral {
        return Err(Error::Precision(format!("U({a}, {b}, {x}): quadrature error too large")));
    }
    Ok(top + integral.ln() - ln_gamma(a))
}

/// Tricomi's `U(a, b, x)` on the principal branch for `a > 0`, `x > 0`.
pub fn tricomi_u(a: f64, b: f64, x: f64) -> Result<f64> {
    let v = ln_tricomi_u(a, b, x)?.exp();
    if !v.is_finite() {
        return Err(Error::Precision(format!("U({a}, {b}, {x}) overflows double precision")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `E₁(x)` from its convergent series, independent of the integral route.
    fn exp_integral_e1(x: f64) -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            sum -= term / k as f64;
        }
        -EULER_GAMMA - x.ln() + sum
    }

    #[test]
    fn reduces_to_power_when_b_is_a_plus_one() {
        let u = tricomi_u(2.0, 3.0, 3.0).unwrap();
        assert!((u - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn unit_parameters_match_exponential_integral() {
        let expected = 1f64.exp() * exp_integral_e1(1.0);
        assert!((expected - 0.596_347_362_323_194).abs() < 1e-14);
        let u = tricomi_u(1.0, 1.0, 1.0).unwrap();
        assert!((u - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn large_argument_asymptote() {
        let x = 1e6;
        let u = tricomi_u(2.0, 3.0, x).unwrap();
        assert!((u * x * x - 1.0).abs() < 1e-4);
        let u = tricomi_u(2.0, 7.5, x).unwrap();
        assert!((u * x * x - 1.0).abs() < 1e-4);
    }

    #[test]
    fn kummer_polynomial_case() {
        // U(a, a+2, x) = x^{-a-1} (x + a)
        for &(a, x) in &[(0.5, 0.3), (3.0, 2.0), (79.6595, 11.0), (46.0, 250.0)] {
            let expected = (-(a + 1.0) * f64::ln(x) + f64::ln(x + a)).exp();
            let u = tricomi_u(a, a + 2.0, x).unwrap();
            assert!((u / expected - 1.0).abs() < 1e-10, "a={a} x={x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(tricomi_u(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(tricomi_u(1.0, 1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(tricomi_u(1.0, f64::NAN, 1.0), Err(Error::Domain(_))));
    }
}
