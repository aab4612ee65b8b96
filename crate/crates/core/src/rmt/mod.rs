//! Largest-singular-value statistics of Ginibre coupling matrices.
//!
//! The largest eigenvalue `κ₁` of the Wishart matrix `W = ΛΛ†` is modelled by
//! a shifted, scaled Gamma law fitted to the Tracy–Widom edge:
//!
//! ```text
//! X = (κ₁ - μ)/ρ + α ~ Gamma(k, θ)
//! μ = (√(n+a₁) + √(m+a₂))²,   ρ = √μ (1/√(n+a₁) + 1/√(m+a₂))^{1/3}
//! ```
//!
//! and `λ₁ = √κ₁`. When `μ - αρ < 0` the support is clamped to `κ₁ > 0`.

pub mod ensemble;
pub mod special;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

pub use ensemble::{
    largest_singular_value, sample_ginibre, sample_ginibre_stream, sample_largest_singular_values, Ensemble,
};
pub use special::{ln_tricomi_u, tricomi_u};

/// Gamma-law fit parameters and finite-size corrections for one ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub ensemble: Ensemble,
    /// Gamma shape.
    pub k: f64,
    /// Gamma scale.
    pub theta: f64,
    /// Shift.
    pub alpha: f64,
    pub a1: f64,
    pub a2: f64,
}

impl EnsembleParams {
    pub const REAL: EnsembleParams =
        EnsembleParams { ensemble: Ensemble::Real, k: 46.446, theta: 0.186054, alpha: 9.84801, a1: -0.5, a2: -0.5 };
    pub const COMPLEX: EnsembleParams =
        EnsembleParams { ensemble: Ensemble::Complex, k: 79.6595, theta: 0.101037, alpha: 9.81961, a1: 0.0, a2: 0.0 };

    pub fn for_ensemble(ensemble: Ensemble) -> Self {
        match ensemble {
            Ensemble::Real => Self::REAL,
            Ensemble::Complex => Self::COMPLEX,
        }
    }
}

/// Approximate law of the largest singular value of an `n × m` Ginibre matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvDistribution {
    pub params: EnsembleParams,
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub rho: f64,
    /// `√max(0, μ - αρ)`.
    pub lower_support: f64,
}

impl SvDistribution {
    pub fn new(ensemble: Ensemble, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!("matrix size must be positive, got {n}×{m}")));
        }
        let params = EnsembleParams::for_ensemble(ensemble);
        let sn = (n as f64 + params.a1).sqrt();
        let sm = (m as f64 + params.a2).sqrt();
        let mu = (sn + sm).powi(2);
        let rho = mu.sqrt() * (1.0 / sn + 1.0 / sm).cbrt();
        let min_kappa = mu - params.alpha * rho;
        Ok(Self { params, n, m, mu, rho, lower_support: min_kappa.max(0.0).sqrt() })
    }

    /// `μ/ρ - α`; the Tricomi argument of the moments is this over `θ`.
    pub fn shifted_center(&self) -> f64 {
        self.mu / self.rho - self.params.alpha
    }

    fn gamma_variable(&self, kappa: f64) -> f64 {
        (kappa - self.mu) / self.rho + self.params.alpha
    }

    fn ln_norm(&self) -> f64 {
        let p = &self.params;
        -self.rho.ln() - p.k * p.theta.ln() - ln_gamma(p.k)
    }

    /// `ln f_κ₁(z)`, or `None` outside the (clamped) support.
    pub fn ln_pdf_kappa1(&self, z: f64) -> Option<f64> {
        let x = self.gamma_variable(z);
        if z <= 0.0 || x <= 0.0 {
            return None;
        }
        let p = &self.params;
        Some(self.ln_norm() + (p.k - 1.0) * x.ln() - x / p.theta)
    }

    /// `ln f_λ₁(y)`, or `None` outside the (clamped) support.
    pub fn ln_pdf_lambda1(&self, y: f64) -> Option<f64> {
        if y <= self.lower_support || y <= 0.0 {
            return None;
        }
        self.ln_pdf_kappa1(y * y).map(|l| std::f64::consts::LN_2 + y.ln() + l)
    }

    /// Mode of `f_λ₁`, located by golden-section search on its log.
    pub fn mode_lambda1(&self) -> f64 {
        let p = &self.params;
        // κ at the Gamma mode is a good bracket centre
        let kappa_mode = self.mu + self.rho * ((p.k - 1.0) * p.theta - p.alpha);
        let centre = kappa_mode.max(self.mu * 0.1).sqrt();
        let (mut a, mut b) = (self.lower_support.max(centre * 0.2), centre * 2.0 + 1.0);
        let f = |y: f64| self.ln_pdf_lambda1(y).unwrap_or(f64::NEG_INFINITY);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }
}

/// `f_κ₁(z)`.
pub fn pdf_kappa1(dist: &SvDistribution, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("pdf_kappa1 at non-finite z = {z}")));
    }
    Ok(dist.ln_pdf_kappa1(z).map_or(0.0, f64::exp))
}

/// `f_λ₁(y) = 2y f_κ₁(y²)` on `y > √max(0, μ - αρ)`.
pub fn pdf_lambda1(dist: &SvDistribution, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("pdf_lambda1 at non-finite y = {y}")));
    }
    Ok(dist.ln_pdf_lambda1(y).map_or(0.0, f64::exp))
}

/// `P(κ₁ ≤ y²)` under the Gamma law. For `μ - αρ < 0` the mass the law puts
/// on `κ₁ < 0` sits at `y = 0`, so this is the distribution function of
/// `√max(κ₁, 0)`.
pub fn cdf_lambda1(dist: &SvDistribution, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("cdf_lambda1 at non-finite y = {y}")));
    }
    let x = dist.gamma_variable(y.max(0.0).powi(2));
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(dist.params.k, x / dist.params.theta))
}

/// `μ - αρ`, the lower end of the Gamma support in `κ₁`.
pub fn min_kappa1(dist: &SvDistribution) -> f64 {
    dist.mu - dist.params.alpha * dist.rho
}

/// `E[λ₁^l] = ρ^{l/2} θ^{-k} c^{l/2+k} U(k, l/2+k+1, c/θ)` with `c = μ/ρ - α`.
///
/// For `c ≤ 0` the expression is continued on the principal branch and the
/// real part is returned; see [`moment_lambda1_principal`].
pub fn moment_lambda1(dist: &SvDistribution, l: u32) -> Result<f64> {
    moment_lambda1_principal(dist, l).map(|z| z.re)
}

/// Principal-branch value of the closed-form moment.
///
/// For `c > 0` this is real and evaluated through [`ln_tricomi_u`]. For
/// `c ≤ 0` the Tricomi argument is negative; the continuation equals
/// `E[(ρ(X + c))^{l/2}]` over the Gamma variable `X` with the principal power
/// `(-r)^{l/2} = r^{l/2} e^{iπl/2}`, which is integrated directly.
pub fn moment_lambda1_principal(dist: &SvDistribution, l: u32) -> Result<C64> {
    if l == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let p = &dist.params;
    let half = f64::from(l) / 2.0;
    let c = dist.shifted_center();
    if c > 0.0 {
        let ln_u = ln_tricomi_u(p.k, half + p.k + 1.0, c / p.theta)?;
        let ln_m = half * dist.rho.ln() - p.k * p.theta.ln() + (half + p.k) * c.ln() + ln_u;
        let v = ln_m.exp();
        if !v.is_finite() {
            return Err(Error::Precision(format!("moment {l} overflows")));
        }
        return Ok(C64::new(v, 0.0));
    }

    let ln_gamma_norm = -p.k * p.theta.ln() - ln_gamma(p.k);
    let ln_g = |x: f64| ln_gamma_norm + (p.k - 1.0) * x.ln() - x / p.theta;
    let zero = -c;
    let sd = p.k.sqrt() * p.theta;
    let upper = p.k * p.theta + 60.0 * sd + zero;
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 4000 };
    let positive = integrate(
        |x| if x <= zero { 0.0 } else { (half * (dist.rho * (x - zero)).ln() + ln_g(x)).exp() },
        zero,
        upper,
        opts,
    )?;
    let negative = if zero > 0.0 {
        integrate(
            |x| if x <= 0.0 || x >= zero { 0.0 } else { (half * (dist.rho * (zero - x)).ln() + ln_g(x)).exp() },
            0.0,
            zero,
            opts,
        )?
        .value
    } else {
        0.0
    };
    let phase = C64::from_polar(1.0, std::f64::consts::PI * half);
    Ok(C64::new(positive.value, 0.0) + phase * negative)
}

/// `Var[λ₁] = E[λ₁²] - E[λ₁]²` with `E[λ₁²] = ρ(kθ - α) + μ`.
pub fn variance_lambda1(dist: &SvDistribution) -> Result<f64> {
    let p = &dist.params;
    let second = dist.rho * (p.k * p.theta - p.alpha) + dist.mu;
    let mean = moment_lambda1(dist, 1)?;
    Ok(second - mean * mean)
}

/// Kolmogorov–Smirnov distance between a sample of `λ₁` values and
/// [`cdf_lambda1`].
pub fn ks_distance(dist: &SvDistribution, samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &y) in sorted.iter().enumerate() {
        let f = cdf_lambda1(dist, y)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parameters() {
        let c = SvDistribution::new(Ensemble::Complex, 5, 5).unwrap();
        assert_eq!(
            (c.params.k, c.params.theta, c.params.alpha, c.params.a1, c.params.a2),
            (79.6595, 0.101037, 9.81961, 0.0, 0.0)
        );
        let r = SvDistribution::new(Ensemble::Real, 5, 5).unwrap();
        assert_eq!(
            (r.params.k, r.params.theta, r.params.alpha, r.params.a1, r.params.a2),
            (46.446, 0.186054, 9.84801, -0.5, -0.5)
        );
    }

    #[test]
    fn centering_and_scaling() {
        let d = SvDistribution::new(Ensemble::Complex, 9, 4).unwrap();
        assert!((d.mu - 25.0).abs() < 1e-14);
        assert!((d.rho - 5.0 * (1.0f64 / 3.0 + 0.5).cbrt()).abs() < 1e-14);
        let r = SvDistribution::new(Ensemble::Real, 3, 3).unwrap();
        assert!((r.mu - 4.0 * 2.5).abs() < 1e-13);
    }

    #[test]
    fn below_support_is_zero() {
        let d = SvDistribution::new(Ensemble::Complex, 30, 30).unwrap();
        assert!(d.lower_support > 0.0);
        assert_eq!(pdf_lambda1(&d, d.lower_support * 0.99).unwrap(), 0.0);
        assert_eq!(pdf_kappa1(&d, min_kappa1(&d) - 1e-9).unwrap(), 0.0);
        assert_eq!(pdf_lambda1(&d, 0.0).unwrap(), 0.0);
        let small = SvDistribution::new(Ensemble::Complex, 2, 2).unwrap();
        assert_eq!(small.lower_support, 0.0);
        assert_eq!(pdf_lambda1(&small, 0.0).unwrap(), 0.0);
        assert_eq!(pdf_kappa1(&small, -0.5).unwrap(), 0.0);
        assert!(pdf_lambda1(&small, f64::NAN).is_err());
        assert!(pdf_kappa1(&small, f64::INFINITY).is_err());
    }

    #[test]
    fn change_of_variables() {
        for ens in [Ensemble::Real, Ensemble::Complex] {
            let d = SvDistribution::new(ens, 7, 4).unwrap();
            for i in 1..200 {
                let y = 0.05 * i as f64;
                let a = pdf_lambda1(&d, y).unwrap();
                let b = 2.0 * y * pdf_kappa1(&d, y * y).unwrap();
                assert!((a - b).abs() <= 1e-10 * b.abs(), "y={y}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn min_kappa_sign_boundary() {
        for ens in [Ensemble::Real, Ensemble::Complex] {
            for n in 2..=15 {
                assert!(min_kappa1(&SvDistribution::new(ens, n, n).unwrap()) < 0.0, "{ens:?} n={n}");
            }
            for n in 16..=40 {
                assert!(min_kappa1(&SvDistribution::new(ens, n, n).unwrap()) > 0.0, "{ens:?} n={n}");
            }
        }
        let d = SvDistribution::new(Ensemble::Complex, 17, 17).unwrap();
        assert_eq!(min_kappa1(&d), d.mu - d.params.alpha * d.rho);
    }

    #[test]
    fn zeroth_moment_is_one() {
        for n in [2, 10, 16, 40] {
            let d = SvDistribution::new(Ensemble::Complex, n, n).unwrap();
            assert_eq!(moment_lambda1(&d, 0).unwrap(), 1.0);
        }
    }

    #[test]
    fn second_moment_closed_form() {
        // U(a, a+2, x) = x^{-a-1}(x + a) makes E[λ₁²] = ρ(kθ - α) + μ exactly
        for n in [16, 25, 80] {
            let d = SvDistribution::new(Ensemble::Complex, n, n).unwrap();
            let p = d.params;
            let expected = d.rho * (p.k * p.theta - p.alpha) + d.mu;
            let m2 = moment_lambda1(&d, 2).unwrap();
            assert!((m2 / expected - 1.0).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn principal_branch_matches_reference() {
        // reference values from an arbitrary-precision hypergeometric library (50 digits)
        let d = SvDistribution::new(Ensemble::Complex, 2, 2).unwrap();
        let m1 = moment_lambda1_principal(&d, 1).unwrap();
        assert!((m1.re - 1.36276627348).abs() < 1e-9, "{m1}");
        assert!((m1.im - 0.226540837764).abs() < 1e-9, "{m1}");
        let m2 = moment_lambda1_principal(&d, 2).unwrap();
        assert!((m2.re - 2.3772568967).abs() < 1e-9 && m2.im.abs() < 1e-12, "{m2}");

        let d = SvDistribution::new(Ensemble::Complex, 5, 5).unwrap();
        let m1 = moment_lambda1_principal(&d, 1).unwrap();
        assert!((m1.re - 3.47024559501).abs() < 1e-9, "{m1}");
        assert!((m1.im - 0.000105711271251).abs() < 1e-11, "{m1}");

        let d = SvDistribution::new(Ensemble::Complex, 20, 20).unwrap();
        assert!((moment_lambda1(&d, 1).unwrap() - 8.23082472931).abs() < 1e-9);
        assert!((moment_lambda1(&d, 2).unwrap() - 67.8861672051).abs() < 1e-8);
        let d = SvDistribution::new(Ensemble::Complex, 50, 50).unwrap();
        assert!((moment_lambda1(&d, 1).unwrap() - 13.5448834053).abs() < 1e-9);
    }

    #[test]
    fn branch_switch_is_continuous() {
        // the closed form (n = 16) and the continued form (n = 15) should sit on
        // one smooth curve; compare against the midpoint of neighbours
        let mean = |n| moment_lambda1(&SvDistribution::new(Ensemble::Complex, n, n).unwrap(), 1).unwrap();
        let (a, b, c) = (mean(14), mean(15), mean(16));
        let (d, e) = (mean(17), mean(18));
        let second_diff = (a - 2.0 * b + c).abs().max((b - 2.0 * c + d).abs()).max((c - 2.0 * d + e).abs());
        assert!(second_diff < 0.05, "{a} {b} {c} {d} {e}");
    }

    #[test]
    fn variance_is_second_minus_first_squared() {
        for n in [16, 30, 100] {
            let d = SvDistribution::new(Ensemble::Complex, n, n).unwrap();
            let v = variance_lambda1(&d).unwrap();
            let m1 = moment_lambda1(&d, 1).unwrap();
            let m2 = moment_lambda1(&d, 2).unwrap();
            assert!(((m2 - m1 * m1) - v).abs() < 1e-8 * m2, "n={n}");
        }
    }

    #[test]
    fn variance_decreases_with_size() {
        let var = |n| variance_lambda1(&SvDistribution::new(Ensemble::Complex, n, n).unwrap()).unwrap();
        let values: Vec<f64> = (5..=60).map(var).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }

    #[test]
    fn cdf_is_monotone_and_reaches_one() {
        let d = SvDistribution::new(Ensemble::Real, 6, 6).unwrap();
        let mut last = 0.0;
        for i in 0..800 {
            let c = cdf_lambda1(&d, 0.02 * i as f64).unwrap();
            assert!(c >= last);
            last = c;
        }
        assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_is_a_maximum() {
        let d = SvDistribution::new(Ensemble::Complex, 10, 10).unwrap();
        let y = d.mode_lambda1();
        let f = |y| pdf_lambda1(&d, y).unwrap();
        assert!(f(y) >= f(y - 0.01) && f(y) >= f(y + 0.01));
    }

    #[test]
    fn ks_of_model_quantiles_is_small() {
        // samples placed at the model's own mid-quantiles give D = 1/(2N)
        let d = SvDistribution::new(Ensemble::Complex, 30, 30).unwrap();
        let n = 200;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let target = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (0.0, 40.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if cdf_lambda1(&d, mid).unwrap() < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        let ks = ks_distance(&d, &samples).unwrap();
        assert!((ks - 0.5 / n as f64).abs() < 1e-9, "{ks}");
        assert!(ks_distance(&d, &[]).is_err());
    }
}
