//! Reference constructions for the acceptance suite, built without the
//! library's Hamiltonian assembly where an independent answer is needed.

use faer::{Mat, Side};
use multilevel_rabi::{CMatrix, ModelSpec, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Entries `scale · (x + iy)` with `x, y` standard normal.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    Mat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale
    })
}

/// Model with `n, m ≤ 4`, `ε ∈ [0, 0.1]`, detunings uniform in `[-1, 1]`.
pub fn random_spec(rng: &mut ChaCha8Rng, cutoff: usize) -> ModelSpec {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=4);
    let mut detunings = |k: usize| (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect::<Vec<f64>>();
    let (delta_e, delta_g) = (detunings(n), detunings(m));
    let epsilon = rng.random_range(0.0..=0.1);
    let coupling = gaussian_matrix(rng, n, m, 0.4);
    ModelSpec::builder(n, m)
        .epsilon(epsilon)
        .delta_e(delta_e)
        .delta_g(delta_g)
        .coupling(coupling)
        .fock_cutoff(cutoff)
        .build()
        .expect("generated parameters are valid")
}

/// Spectrum of the resonant two-level Rabi Hamiltonian
/// `a†a + |e⟩⟨e| + λ σ_x (a + a†)`, assembled directly as a real matrix.
pub fn qrm_oracle(lambda: f64, cutoff: usize) -> Vec<f64> {
    let p = cutoff + 1;
    let h = Mat::<f64>::from_fn(2 * p, 2 * p, |r, c| {
        let (ar, nr, ac, nc) = (r / p, r % p, c / p, c % p);
        if r == c {
            return (nr + ar) as f64;
        }
        if ar != ac && nr.abs_diff(nc) == 1 {
            lambda * (nr.max(nc) as f64).sqrt()
        } else {
            0.0
        }
    });
    h.self_adjoint_eigenvalues(Side::Lower).expect("small real symmetric matrix")
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
