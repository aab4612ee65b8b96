//! Multilevel quantum Rabi models.
//!
//! A single bosonic mode of frequency `ω` couples `n` excited and `m` ground
//! atomic levels through a complex `n × m` matrix `Λ`:
//!
//! ```text
//! H = ω N + ε Σ δᵉ |e⟩⟨e| + ε Σ δᵍ |g⟩⟨g| + Σ (Λᵢⱼ |gⱼ⟩⟨eᵢ| + h.c.)(a + a†)
//! ```
//!
//! The crate builds `H` in a truncated Fock basis, diagonalizes it with
//! cutoff convergence, rotates the atomic levels into the radiation basis
//! given by the SVD of `Λ`, and evaluates largest-singular-value statistics
//! of Ginibre couplings. The [`experiments`] module reproduces the sweeps
//! used to study these models.

pub mod error;
pub mod experiments;
pub mod model;
pub mod quadrature;
pub mod radiation;
pub mod rmt;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    build_doublet, build_hamiltonian, build_parity, build_total_excitation, expectation, AtomicLevel, BasisState,
    CMatrix, DoubletBasis, FockBasis, HamiltonianMatrix, ModelSpec, ModelSpecBuilder, OperatorEntries, SymmetryKind,
    SymmetryOperator,
};
pub use num_complex::Complex64 as C64;
pub use radiation::{
    assemble_radiation_hamiltonian, effective_rabi_models, to_radiation_basis, EffectiveRabi, RadiationDecomposition,
};
pub use spectral::{
    converge_levels, converge_spectrum, converge_spectrum_with, eigendecompose, svd, ConvergedLevels, ConvergenceOptions,
    DoubletLabels, SpectrumResult,
    SvdResult,
};
