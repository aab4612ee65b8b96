//! Radiation basis: the atomic basis in which the light-matter coupling is
//! diagonal in a collective type index `k`.
//!
//! With `Λ = v† λ u` (see [`SvdResult`]) the interaction becomes
//! `Σ_k λ_k (|G_k⟩⟨E_k| + h.c.)(a + a†)`. Detunings are no longer diagonal in
//! this basis; they appear as the Hermitian blocks
//! `⟨E_k|H_ε|E_l⟩ = Σ_i conj(v_ki) ε δ_{e_i} v_li` and likewise for `u`.
//! States beyond `min(n, m)` in the larger manifold never couple to the field.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, CMatrix, FockBasis, HamiltonianMatrix, ModelSpec};
use crate::spectral::{svd, SvdResult};

#[derive(Clone, Debug, PartialEq)]
pub struct RadiationDecomposition {
    pub svd: SvdResult,
    /// `λ_1 ≥ λ_2 ≥ … ≥ 0`, identical to `svd.singular_values`.
    pub effective_couplings: Vec<f64>,
    /// `max(n - m, 0)` excited radiation states with no field coupling.
    pub dark_excited_count: usize,
    /// `max(m - n, 0)` ground radiation states with no field coupling.
    pub dark_ground_count: usize,
    /// `n × n`, detuning of the excited manifold in the `E_k` basis.
    pub detuning_excited_block: CMatrix,
    /// `m × m`, detuning of the ground manifold in the `G_k` basis.
    pub detuning_ground_block: CMatrix,
}

impl RadiationDecomposition {
    /// Type index of radiation state `k` (zero-based); `None` for dark
    /// states outside the paired range.
    pub fn type_index(&self, k: usize) -> Option<usize> {
        (k < self.effective_couplings.len()).then_some(k + 1)
    }
}

/// `R diag(values) R†`-style block with rows of `r` as the new basis:
/// `B_kl = Σ_a conj(r_ka) values_a r_la`.
fn rotate_diagonal(r: &CMatrix, values: &[f64]) -> CMatrix {
    let size = r.nrows();
    let mut b = Mat::from_fn(size, size, |k, l| {
        (0..size).map(|a| r[(k, a)].conj() * values[a] * r[(l, a)]).sum::<C64>()
    });
    for k in 0..size {
        b[(k, k)] = C64::new(b[(k, k)].re, 0.0);
        for l in k + 1..size {
            b[(l, k)] = b[(k, l)].conj();
        }
    }
    b
}

pub fn to_radiation_basis(spec: &ModelSpec) -> Result<RadiationDecomposition> {
    let svd = svd(spec.coupling())?;
    let eps = spec.epsilon();
    let de: Vec<f64> = spec.delta_e().iter().map(|d| eps * d).collect();
    let dg: Vec<f64> = spec.delta_g().iter().map(|d| eps * d).collect();
    let (n, m) = (spec.n_excited(), spec.n_ground());
    Ok(RadiationDecomposition {
        effective_couplings: svd.singular_values.clone(),
        dark_excited_count: n.saturating_sub(m),
        dark_ground_count: m.saturating_sub(n),
        detuning_excited_block: rotate_diagonal(&svd.v, &de),
        detuning_ground_block: rotate_diagonal(&svd.u, &dg),
        svd,
    })
}

/// Full Hamiltonian in the radiation basis (`G_1..G_m, E_1..E_n` ⊗ photons).
/// Unitarily equivalent to [`crate::model::build_hamiltonian`].
pub fn assemble_radiation_hamiltonian(
    decomp: &RadiationDecomposition,
    spec: &ModelSpec,
) -> Result<HamiltonianMatrix> {
    let (n, m) = (spec.n_excited(), spec.n_ground());
    if decomp.detuning_excited_block.nrows() != n
        || decomp.detuning_ground_block.nrows() != m
        || decomp.effective_couplings.len() != n.min(m)
    {
        return Err(Error::DimensionMismatch(format!(
            "decomposition is for {}×{} levels, model has {n}×{m}",
            decomp.detuning_excited_block.nrows(),
            decomp.detuning_ground_block.nrows()
        )));
    }
    let basis = FockBasis::new(m, n, spec.fock_cutoff());
    let mut coupling_ge = Mat::<C64>::zeros(m, n);
    for (k, s) in decomp.effective_couplings.iter().enumerate() {
        coupling_ge[(k, k)] = C64::new(*s, 0.0);
    }
    let matrix = assemble_hamiltonian(
        basis,
        spec.omega(),
        &decomp.detuning_ground_block,
        &decomp.detuning_excited_block,
        &coupling_ge,
    );
    Ok(HamiltonianMatrix { matrix, basis })
}

/// Parameters of one embedded two-level Rabi model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveRabi {
    pub coupling: f64,
    pub omega: f64,
}

/// The `min(n, m)` standalone Rabi models whose direct sum is the bright
/// sector of a degenerate (`ε = 0`) model.
pub fn effective_rabi_models(decomp: &RadiationDecomposition, spec: &ModelSpec) -> Result<Vec<EffectiveRabi>> {
    if spec.epsilon() != 0.0 {
        return Err(Error::Unsupported(format!(
            "direct-sum reduction is only exact at ε = 0 (got ε = {}); diagonalize the full model instead",
            spec.epsilon()
        )));
    }
    if decomp.effective_couplings.len() != spec.n_excited().min(spec.n_ground()) {
        return Err(Error::DimensionMismatch("decomposition does not match model".into()));
    }
    Ok(decomp
        .effective_couplings
        .iter()
        .map(|&coupling| EffectiveRabi { coupling, omega: spec.omega() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_doublet, build_hamiltonian, DoubletBasis};
    use crate::spectral::eigvalsh;

    fn real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
        Mat::from_fn(rows, cols, |i, j| C64::new(f(i, j), 0.0))
    }

    fn symmetric_pair(lambda: f64, b: f64) -> CMatrix {
        real(2, 2, |i, j| if i == j { lambda } else { lambda * b })
    }

    #[test]
    fn symmetric_two_level_pair() {
        let spec = ModelSpec::degenerate(symmetric_pair(0.6, 0.4), 6).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        assert!((d.effective_couplings[0] - 0.6 * 1.4).abs() < 1e-14);
        assert!((d.effective_couplings[1] - 0.6 * 0.6).abs() < 1e-14);
        assert_eq!(d.dark_excited_count, 0);
        assert!(d.detuning_excited_block.col_iter().flat_map(|c| c.iter()).all(|z| *z == C64::new(0.0, 0.0)));
        assert!(d.detuning_ground_block.col_iter().flat_map(|c| c.iter()).all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn full_overlap_makes_type_two_dark() {
        let spec = ModelSpec::degenerate(symmetric_pair(0.5, 1.0), 4).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        assert!((d.effective_couplings[0] - 1.0).abs() < 1e-14);
        assert!(d.effective_couplings[1].abs() < 1e-14);
        let models = effective_rabi_models(&d, &spec).unwrap();
        assert!((models[0].coupling - 1.0).abs() < 1e-14 && models[1].coupling.abs() < 1e-14);
    }

    #[test]
    fn single_ground_level_gives_sqrt_n_boost() {
        let lambda = 0.3;
        let spec = ModelSpec::degenerate(real(3, 1, |_, _| lambda), 4).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        assert_eq!(d.effective_couplings.len(), 1);
        assert!((d.effective_couplings[0] - 3f64.sqrt() * lambda).abs() < 1e-14);
        assert_eq!(d.dark_excited_count, 2);
        assert_eq!(d.type_index(1), None);
    }

    #[test]
    fn detuning_block_of_symmetric_pair() {
        let (eps, de1, de2) = (0.02, -0.4, 0.9);
        let spec = ModelSpec::builder(2, 2)
            .coupling(symmetric_pair(0.5, 0.3))
            .epsilon(eps)
            .delta_e(vec![de1, de2])
            .delta_g(vec![0.1, -0.2])
            .build()
            .unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        let b = &d.detuning_excited_block;
        let diag = eps * (de1 + de2) / 2.0;
        let off = eps * (de1 - de2) / 2.0;
        assert!((b[(0, 0)] - C64::new(diag, 0.0)).norm() < 1e-15);
        assert!((b[(1, 1)] - C64::new(diag, 0.0)).norm() < 1e-15);
        assert!((b[(0, 1)] - C64::new(off, 0.0)).norm() < 1e-15);
        assert!((b[(1, 0)] - C64::new(off, 0.0)).norm() < 1e-15);
        let g = &d.detuning_ground_block;
        assert!((g[(0, 1)] - C64::new(eps * 0.15, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn radiation_hamiltonian_is_isospectral() {
        let coupling = Mat::from_fn(3, 2, |i, j| C64::new(0.4 - 0.3 * i as f64 + 0.1 * j as f64, 0.2 * (i * j) as f64 - 0.1));
        let spec = ModelSpec::builder(3, 2)
            .coupling(coupling)
            .epsilon(0.07)
            .delta_e(vec![1.0, -0.3, 0.2])
            .delta_g(vec![-1.0, 0.6])
            .fock_cutoff(12)
            .build()
            .unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        let bare = eigvalsh(&build_hamiltonian(&spec).matrix).unwrap();
        let rad = eigvalsh(&assemble_radiation_hamiltonian(&d, &spec).unwrap().matrix).unwrap();
        for (a, b) in bare.iter().zip(&rad) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_radiation_hamiltonian_is_block_diagonal() {
        let spec = ModelSpec::degenerate(symmetric_pair(0.7, 0.5), 5).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        let h = assemble_radiation_hamiltonian(&d, &spec).unwrap();
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                let (a, b) = (h.basis.state(r).level.index(), h.basis.state(c).level.index());
                if a != b {
                    assert_eq!(h.matrix[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn uniform_coupling_leaves_one_bright_block() {
        let n = 5;
        let lambda = 0.2;
        let spec = ModelSpec::degenerate(real(n, n, |_, _| lambda), 4).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        let h = assemble_radiation_hamiltonian(&d, &spec).unwrap();
        assert!((d.effective_couplings[0] - n as f64 * lambda).abs() < 1e-13);
        // every coupling entry outside the type-1 pair is zero up to rounding of the SVD
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                let (sr, sc) = (h.basis.state(r), h.basis.state(c));
                if r != c && (sr.level.index() != 0 || sc.level.index() != 0) {
                    assert!(h.matrix[(r, c)].norm() < 1e-14, "{r},{c}");
                }
            }
        }
    }

    #[test]
    fn radiation_doublet_commutes_when_degenerate() {
        let spec = ModelSpec::degenerate(symmetric_pair(0.9, 0.35), 10).unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        let op = build_doublet(&spec, DoubletBasis::Radiation(&d)).unwrap();
        let h = build_hamiltonian(&spec);
        assert!(op.commutator_max(&h.matrix) <= 1e-12 * h.max_abs());
        let detuned = ModelSpec::builder(2, 2)
            .coupling(symmetric_pair(0.9, 0.35))
            .epsilon(0.05)
            .delta_e(vec![-1.0, 1.0])
            .delta_g(vec![-1.0, 1.0])
            .fock_cutoff(10)
            .build()
            .unwrap();
        let d2 = to_radiation_basis(&detuned).unwrap();
        let op2 = build_doublet(&detuned, DoubletBasis::Radiation(&d2)).unwrap();
        let h2 = build_hamiltonian(&detuned);
        assert!(op2.commutator_max(&h2.matrix) > 1e-3);
    }

    #[test]
    fn effective_models_refuse_detuning() {
        let spec = ModelSpec::builder(2, 2)
            .coupling(symmetric_pair(1.0, 0.2))
            .epsilon(0.01)
            .build()
            .unwrap();
        let d = to_radiation_basis(&spec).unwrap();
        assert!(matches!(effective_rabi_models(&d, &spec), Err(Error::Unsupported(_))));
    }

    #[test]
    fn effective_models_for_diagonal_and_uniform() {
        let lambda = 0.8;
        let spec = ModelSpec::degenerate(real(2, 2, |i, j| if i == j { [lambda, 0.7 * lambda][i] } else { 0.0 }), 4).unwrap();
        let models = effective_rabi_models(&to_radiation_basis(&spec).unwrap(), &spec).unwrap();
        assert!((models[0].coupling - lambda).abs() < 1e-15);
        assert!((models[1].coupling - 0.7 * lambda).abs() < 1e-15);
        assert!(models.iter().all(|m| m.omega == 1.0));

        let spec = ModelSpec::degenerate(real(4, 4, |_, _| lambda), 4).unwrap();
        let models = effective_rabi_models(&to_radiation_basis(&spec).unwrap(), &spec).unwrap();
        assert!((models[0].coupling - 4.0 * lambda).abs() < 1e-13);
        assert!(models[1..].iter().all(|m| m.coupling < 1e-13));
    }
}
