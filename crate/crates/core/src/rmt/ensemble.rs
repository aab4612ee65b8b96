//! Seeded Ginibre sampling.
//!
//! Every matrix is drawn from its own ChaCha8 stream `(seed, stream)`, so a
//! Monte Carlo run partitioned over stream indices gives the same numbers no
//! matter how many workers evaluate it.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    #[serde(alias = "real-ginibre")]
    Real,
    #[serde(alias = "complex-ginibre")]
    Complex,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Real => "real",
            Ensemble::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "real-ginibre" => Ok(Ensemble::Real),
            "complex" | "complex-ginibre" => Ok(Ensemble::Complex),
            other => Err(Error::Domain(format!("unknown ensemble '{other}' (expected real|complex)"))),
        }
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n × m` Ginibre matrix from stream 0 of `seed`.
pub fn sample_ginibre(n: usize, m: usize, ensemble: Ensemble, seed: u64) -> CMatrix {
    sample_ginibre_stream(n, m, ensemble, seed, 0)
}

/// Complex entries are `X + iY` with `X, Y ~ N(0, 1/2)`; real entries are
/// `N(0, 1)`. Entries are drawn in row-major order.
pub fn sample_ginibre_stream(n: usize, m: usize, ensemble: Ensemble, seed: u64, stream: u64) -> CMatrix {
    let mut rng = stream_rng(seed, stream);
    let mut out = Mat::<C64>::zeros(n, m);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in 0..m {
            let x: f64 = StandardNormal.sample(&mut rng);
            out[(i, j)] = match ensemble {
                Ensemble::Real => C64::new(x, 0.0),
                Ensemble::Complex => {
                    let y: f64 = StandardNormal.sample(&mut rng);
                    C64::new(half * x, half * y)
                }
            };
        }
    }
    out
}

pub fn largest_singular_value(m: &CMatrix) -> Result<f64> {
    let s = m.singular_values().map_err(|_| Error::SvdNoConvergence)?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Stream index for trial `t` of an `n × m` experiment; keeps different
/// matrix sizes on disjoint streams.
pub fn trial_stream(n: usize, m: usize, trial: u64) -> u64 {
    ((n as u64) << 48) ^ ((m as u64) << 32) ^ trial
}

/// Largest singular values of `trials` independent Ginibre matrices, in
/// trial order.
pub fn sample_largest_singular_values(
    n: usize,
    m: usize,
    ensemble: Ensemble,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| largest_singular_value(&sample_ginibre_stream(n, m, ensemble, seed, trial_stream(n, m, t))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = sample_ginibre(4, 3, Ensemble::Complex, 99);
        let b = sample_ginibre(4, 3, Ensemble::Complex, 99);
        assert_eq!(a, b);
        let c = sample_ginibre_stream(4, 3, Ensemble::Complex, 99, 1);
        assert_ne!(a, c);
    }

    #[test]
    fn complex_entries_have_unit_variance() {
        let m = sample_ginibre(1000, 1000, Ensemble::Complex, 7);
        let n = 1_000_000.0;
        let mean_sq: f64 = m.col_iter().flat_map(|c| c.iter().map(|z| z.norm_sqr())).sum::<f64>() / n;
        assert!((mean_sq - 1.0).abs() < 0.01, "{mean_sq}");
        let mean: C64 = m.col_iter().flat_map(|c| c.iter().copied()).sum::<C64>() / n;
        // σ of each component is √(1/2); allow 3σ/√N
        let bound = 3.0 * std::f64::consts::FRAC_1_SQRT_2 / n.sqrt();
        assert!(mean.re.abs() < bound && mean.im.abs() < bound, "{mean}");
        let var_re: f64 = m.col_iter().flat_map(|c| c.iter().map(|z| z.re * z.re)).sum::<f64>() / n;
        assert!((var_re - 0.5).abs() < 0.01);
    }

    #[test]
    fn real_entries_have_unit_variance() {
        let m = sample_ginibre(500, 400, Ensemble::Real, 3);
        let n = 200_000.0;
        assert!(m.col_iter().flat_map(|c| c.iter()).all(|z| z.im == 0.0));
        let var: f64 = m.col_iter().flat_map(|c| c.iter().map(|z| z.re * z.re)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = sample_largest_singular_values(5, 5, Ensemble::Complex, 20, 1).unwrap();
        let b = sample_largest_singular_values(5, 5, Ensemble::Complex, 20, 1).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| sample_largest_singular_values(5, 5, Ensemble::Complex, 20, 1).unwrap());
        assert_eq!(a, c);
    }
}
