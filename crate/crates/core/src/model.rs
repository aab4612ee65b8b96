//! Physical model description and truncated Fock-space Hamiltonians.
//!
//! The atom has `m` ground levels `g_1..g_m` near zero energy and `n` excited
//! levels `e_1..e_n` near `ω`, all coupled to one field mode through the
//! quadrature `a + a†`:
//!
//! ```text
//! H = ω N_tot + ε Σ_i δ_{e_i} |e_i⟩⟨e_i| + ε Σ_j δ_{g_j} |g_j⟩⟨g_j|
//!       + Σ_ij (Λ_ij |g_j⟩⟨e_i| + h.c.)(a + a†)
//! N_tot = a†a + Σ_i |e_i⟩⟨e_i|
//! ```
//!
//! Basis index = `atomic_index * (cutoff + 1) + photons`, atomic order
//! `g_1..g_m, e_1..e_n`. Photon creation beyond the cutoff is dropped.

use std::fmt;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::radiation::RadiationDecomposition;

pub type CMatrix = Mat<C64>;

/// Atomic level label with a zero-based index inside its manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomicLevel {
    Ground(usize),
    Excited(usize),
}

impl AtomicLevel {
    pub fn is_excited(self) -> bool {
        matches!(self, AtomicLevel::Excited(_))
    }

    /// Index within the manifold.
    pub fn index(self) -> usize {
        match self {
            AtomicLevel::Ground(j) | AtomicLevel::Excited(j) => j,
        }
    }
}

impl fmt::Display for AtomicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicLevel::Ground(j) => write!(f, "g_{}", j + 1),
            AtomicLevel::Excited(i) => write!(f, "e_{}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisState {
    pub level: AtomicLevel,
    pub photons: usize,
}

/// Product basis of atomic levels and truncated photon numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    pub n_ground: usize,
    pub n_excited: usize,
    pub cutoff: usize,
}

impl FockBasis {
    pub fn new(n_ground: usize, n_excited: usize, cutoff: usize) -> Self {
        Self { n_ground, n_excited, cutoff }
    }

    pub fn n_atomic(&self) -> usize {
        self.n_ground + self.n_excited
    }

    pub fn n_photon_states(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.n_atomic() * self.n_photon_states()
    }

    pub fn atomic_index(&self, level: AtomicLevel) -> usize {
        match level {
            AtomicLevel::Ground(j) => j,
            AtomicLevel::Excited(i) => self.n_ground + i,
        }
    }

    pub fn atomic_level(&self, atomic_index: usize) -> AtomicLevel {
        if atomic_index < self.n_ground {
            AtomicLevel::Ground(atomic_index)
        } else {
            AtomicLevel::Excited(atomic_index - self.n_ground)
        }
    }

    pub fn index(&self, level: AtomicLevel, photons: usize) -> usize {
        debug_assert!(photons <= self.cutoff);
        self.atomic_index(level) * self.n_photon_states() + photons
    }

    pub fn state(&self, index: usize) -> BasisState {
        let np = self.n_photon_states();
        BasisState { level: self.atomic_level(index / np), photons: index % np }
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }

    /// Eigenvalue of `N_tot` on basis state `index`.
    pub fn excitation_number(&self, index: usize) -> usize {
        let s = self.state(index);
        s.photons + usize::from(s.level.is_excited())
    }

    /// `+1` for even total excitation number, `-1` for odd.
    pub fn parity(&self, index: usize) -> i8 {
        if self.excitation_number(index) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Full physical description of a multilevel Rabi model (ħ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    n_excited: usize,
    n_ground: usize,
    omega: f64,
    epsilon: f64,
    delta_e: Vec<f64>,
    delta_g: Vec<f64>,
    coupling: CMatrix,
    fock_cutoff: usize,
}

/// Builder for [`ModelSpec`]; every invariant is checked in [`build`](Self::build).
#[derive(Clone, Debug)]
pub struct ModelSpecBuilder {
    n_excited: usize,
    n_ground: usize,
    omega: f64,
    epsilon: f64,
    delta_e: Option<Vec<f64>>,
    delta_g: Option<Vec<f64>>,
    coupling: Option<CMatrix>,
    fock_cutoff: usize,
}

impl ModelSpecBuilder {
    pub fn omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn delta_e(mut self, delta_e: Vec<f64>) -> Self {
        self.delta_e = Some(delta_e);
        self
    }

    pub fn delta_g(mut self, delta_g: Vec<f64>) -> Self {
        self.delta_g = Some(delta_g);
        self
    }

    /// Complex `n_excited × n_ground` matrix; element `(i, j)` couples
    /// `g_j ↔ e_i`.
    pub fn coupling(mut self, coupling: CMatrix) -> Self {
        self.coupling = Some(coupling);
        self
    }

    pub fn fock_cutoff(mut self, cutoff: usize) -> Self {
        self.fock_cutoff = cutoff;
        self
    }

    pub fn build(self) -> Result<ModelSpec> {
        let (n, m) = (self.n_excited, self.n_ground);
        if n == 0 || m == 0 {
            return Err(Error::InvalidModel("level counts must be positive".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidModel(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidModel(format!("epsilon must be ≥ 0, got {}", self.epsilon)));
        }
        if self.fock_cutoff < 1 {
            return Err(Error::InvalidModel("fock_cutoff must be ≥ 1".into()));
        }
        let delta_e = self.delta_e.unwrap_or_else(|| vec![0.0; n]);
        let delta_g = self.delta_g.unwrap_or_else(|| vec![0.0; m]);
        if delta_e.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "delta_e has {} entries, expected n_excited = {n}",
                delta_e.len()
            )));
        }
        if delta_g.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "delta_g has {} entries, expected n_ground = {m}",
                delta_g.len()
            )));
        }
        if let Some(d) = delta_e.iter().chain(&delta_g).find(|d| !(-1.0..=1.0).contains(*d)) {
            return Err(Error::InvalidModel(format!("detuning {d} outside [-1, 1]")));
        }
        let coupling = self.coupling.unwrap_or_else(|| Mat::zeros(n, m));
        if coupling.nrows() != n || coupling.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "coupling is {}×{}, expected {n}×{m} (excited × ground)",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if coupling.col_iter().flat_map(|c| c.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidModel("coupling has non-finite entries".into()));
        }
        Ok(ModelSpec {
            n_excited: n,
            n_ground: m,
            omega: self.omega,
            epsilon: self.epsilon,
            delta_e,
            delta_g,
            coupling,
            fock_cutoff: self.fock_cutoff,
        })
    }
}

impl ModelSpec {
    /// Starts a builder with `ω = 1`, `ε = 0`, zero detunings, zero coupling
    /// and a cutoff of 32 photons.
    pub fn builder(n_excited: usize, n_ground: usize) -> ModelSpecBuilder {
        ModelSpecBuilder {
            n_excited,
            n_ground,
            omega: 1.0,
            epsilon: 0.0,
            delta_e: None,
            delta_g: None,
            coupling: None,
            fock_cutoff: 32,
        }
    }

    /// Degenerate model (`ε = 0`, `ω = 1`) with the given coupling.
    pub fn degenerate(coupling: CMatrix, fock_cutoff: usize) -> Result<Self> {
        Self::builder(coupling.nrows(), coupling.ncols())
            .coupling(coupling)
            .fock_cutoff(fock_cutoff)
            .build()
    }

    /// Standard two-level quantum Rabi model with real coupling `lambda`.
    pub fn qrm(lambda: f64, omega: f64, fock_cutoff: usize) -> Result<Self> {
        Self::builder(1, 1)
            .omega(omega)
            .coupling(Mat::from_fn(1, 1, |_, _| C64::new(lambda, 0.0)))
            .fock_cutoff(fock_cutoff)
            .build()
    }

    pub fn n_excited(&self) -> usize {
        self.n_excited
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_e(&self) -> &[f64] {
        &self.delta_e
    }

    pub fn delta_g(&self) -> &[f64] {
        &self.delta_g
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn basis(&self) -> FockBasis {
        FockBasis::new(self.n_ground, self.n_excited, self.fock_cutoff)
    }

    pub fn with_cutoff(&self, fock_cutoff: usize) -> Self {
        assert!(fock_cutoff >= 1, "fock_cutoff must be ≥ 1");
        Self { fock_cutoff, ..self.clone() }
    }

    /// Same model with the coupling matrix multiplied by `scale`.
    pub fn scaled_coupling(&self, scale: f64) -> Self {
        let coupling = Mat::from_fn(self.n_excited, self.n_ground, |i, j| self.coupling[(i, j)] * scale);
        Self { coupling, ..self.clone() }
    }

    /// True when no detuning term contributes (`ε δ = 0` for every level).
    pub fn is_degenerate(&self) -> bool {
        self.epsilon == 0.0
    }
}

/// Dense Hamiltonian together with the basis it is expressed in.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub matrix: CMatrix,
    pub basis: FockBasis,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_map(&self) -> Vec<BasisState> {
        self.basis.states().collect()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.col_iter().flat_map(|c| c.iter().map(|z| z.norm())).fold(0.0, f64::max)
}

/// Assembles `ω N_tot + (atomic blocks) + (M ⊗ (a + a†) + h.c.)` in the
/// product basis, where `coupling_ge` is the `m × n` coefficient matrix of
/// `|g_j⟩⟨e_i|`. Shared between the bare and radiation bases.
pub(crate) fn assemble_hamiltonian(
    basis: FockBasis,
    omega: f64,
    ground_block: &CMatrix,
    excited_block: &CMatrix,
    coupling_ge: &CMatrix,
) -> CMatrix {
    let (m, n, np) = (basis.n_ground, basis.n_excited, basis.n_photon_states());
    let dim = basis.dim();
    let mut h = Mat::<C64>::zeros(dim, dim);

    for idx in 0..dim {
        h[(idx, idx)] = C64::new(omega * basis.excitation_number(idx) as f64, 0.0);
    }

    let mut add_atomic_block = |block: &CMatrix, offset: usize| {
        let size = block.nrows();
        for a in 0..size {
            for b in a..size {
                let v = if a == b { C64::new(block[(a, a)].re, 0.0) } else { block[(a, b)] };
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..np {
                    let (r, c) = ((offset + a) * np + p, (offset + b) * np + p);
                    h[(r, c)] += v;
                    if r != c {
                        h[(c, r)] += v.conj();
                    }
                }
            }
        }
    };
    add_atomic_block(ground_block, 0);
    add_atomic_block(excited_block, m);

    for j in 0..m {
        for i in 0..n {
            let c = coupling_ge[(j, i)];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let g0 = j * np;
            let e0 = (m + i) * np;
            for p in 0..basis.cutoff {
                let amp = ((p + 1) as f64).sqrt();
                // ⟨g,p|H|e,p+1⟩ and ⟨g,p+1|H|e,p⟩ from a and a† respectively
                h[(g0 + p, e0 + p + 1)] = c * amp;
                h[(g0 + p + 1, e0 + p)] = c * amp;
                h[(e0 + p + 1, g0 + p)] = (c * amp).conj();
                h[(e0 + p, g0 + p + 1)] = (c * amp).conj();
            }
        }
    }
    h
}

fn diag_block(values: impl Iterator<Item = f64>) -> CMatrix {
    let v: Vec<f64> = values.collect();
    Mat::from_fn(v.len(), v.len(), |a, b| if a == b { C64::new(v[a], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Matrix of the Hamiltonian in the bare product basis.
pub fn build_hamiltonian(spec: &ModelSpec) -> HamiltonianMatrix {
    let basis = spec.basis();
    let eps = spec.epsilon;
    let ground = diag_block(spec.delta_g.iter().map(|d| eps * d));
    let excited = diag_block(spec.delta_e.iter().map(|d| eps * d));
    let coupling_ge = spec.coupling.transpose().to_owned();
    HamiltonianMatrix {
        matrix: assemble_hamiltonian(basis, spec.omega, &ground, &excited, &coupling_ge),
        basis,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    Parity,
    Doublet,
    TotalExcitation,
}

#[derive(Clone, Debug)]
pub enum OperatorEntries {
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

/// Hermitian operator expressed in the same basis as a [`HamiltonianMatrix`].
#[derive(Clone, Debug)]
pub struct SymmetryOperator {
    pub kind: SymmetryKind,
    pub entries: OperatorEntries,
}

impl SymmetryOperator {
    pub fn dim(&self) -> usize {
        match &self.entries {
            OperatorEntries::Diagonal(d) => d.len(),
            OperatorEntries::Dense(m) => m.nrows(),
        }
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        match &self.entries {
            OperatorEntries::Diagonal(d) => Some(d),
            OperatorEntries::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.entries {
            OperatorEntries::Diagonal(d) => diag_block(d.iter().copied()),
            OperatorEntries::Dense(m) => m.clone(),
        }
    }

    /// `O ψ`.
    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        match &self.entries {
            OperatorEntries::Diagonal(d) => d.iter().zip(state).map(|(o, z)| z * *o).collect(),
            OperatorEntries::Dense(m) => (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * state[c]).sum())
                .collect(),
        }
    }

    /// `max |[O, H]_ij|`.
    pub fn commutator_max(&self, h: &CMatrix) -> f64 {
        let dim = h.nrows();
        assert_eq!(dim, self.dim(), "operator and Hamiltonian dimensions differ");
        match &self.entries {
            OperatorEntries::Diagonal(d) => {
                let mut worst = 0.0_f64;
                for c in 0..dim {
                    for r in 0..dim {
                        worst = worst.max((h[(r, c)] * (d[r] - d[c])).norm());
                    }
                }
                worst
            }
            OperatorEntries::Dense(o) => {
                let comm = o * h - h * o;
                max_abs(&comm)
            }
        }
    }

    /// Expectation value `⟨ψ|O|ψ⟩` of a normalized state.
    pub fn expectation(&self, state: &[C64]) -> Result<f64> {
        expectation(self, state)
    }
}

/// Diagonal `exp(iπ N_tot)`.
pub fn build_parity(spec: &ModelSpec) -> SymmetryOperator {
    let basis = spec.basis();
    let d = (0..basis.dim()).map(|i| f64::from(basis.parity(i))).collect();
    SymmetryOperator { kind: SymmetryKind::Parity, entries: OperatorEntries::Diagonal(d) }
}

pub fn build_total_excitation(spec: &ModelSpec) -> SymmetryOperator {
    let basis = spec.basis();
    let d = (0..basis.dim()).map(|i| basis.excitation_number(i) as f64).collect();
    SymmetryOperator { kind: SymmetryKind::TotalExcitation, entries: OperatorEntries::Diagonal(d) }
}

/// Atomic basis in which the doublet-type operator is defined.
#[derive(Clone, Copy, Debug)]
pub enum DoubletBasis<'a> {
    /// Pairs `g_k` with `e_k` by index; requires `n = m`.
    Bare,
    /// Pairs the radiation states `G_k`, `E_k` of the coupling SVD.
    Radiation(&'a RadiationDecomposition),
}

/// `D = Σ_k k (|E_k⟩⟨E_k| + |G_k⟩⟨G_k|) ⊗ 1`, expressed in the bare basis.
///
/// In the radiation variant, states beyond `min(n, m)` (dark states of the
/// larger manifold) do not appear in the sum and carry type 0.
pub fn build_doublet(spec: &ModelSpec, basis: DoubletBasis<'_>) -> Result<SymmetryOperator> {
    let fock = spec.basis();
    match basis {
        DoubletBasis::Bare => {
            if spec.n_excited != spec.n_ground {
                return Err(Error::DimensionMismatch(format!(
                    "bare doublet operator needs n = m, got n = {}, m = {}",
                    spec.n_excited, spec.n_ground
                )));
            }
            let d = fock
                .states()
                .map(|s| (s.level.index() + 1) as f64)
                .collect();
            Ok(SymmetryOperator { kind: SymmetryKind::Doublet, entries: OperatorEntries::Diagonal(d) })
        }
        DoubletBasis::Radiation(decomp) => {
            let (n, m) = (spec.n_excited, spec.n_ground);
            if decomp.svd.u.nrows() != m || decomp.svd.v.nrows() != n {
                return Err(Error::DimensionMismatch(
                    "radiation decomposition does not match the model's level counts".into(),
                ));
            }
            let rank = n.min(m);
            let type_of = |k: usize| if k < rank { (k + 1) as f64 } else { 0.0 };
            // ⟨x_a|D|x_b⟩ = Σ_k type_k R_ka conj(R_kb) with R = u or v (rows = radiation states)
            let project = |r: &CMatrix| {
                let size = r.nrows();
                Mat::from_fn(size, size, |a, b| {
                    (0..size).map(|k| r[(k, a)] * r[(k, b)].conj() * type_of(k)).sum::<C64>()
                })
            };
            let dg = project(&decomp.svd.u);
            let de = project(&decomp.svd.v);
            let np = fock.n_photon_states();
            let dim = fock.dim();
            let mut op = Mat::<C64>::zeros(dim, dim);
            for (block, offset) in [(&dg, 0usize), (&de, m)] {
                let size = block.nrows();
                for a in 0..size {
                    for b in 0..size {
                        let v = block[(a, b)];
                        for p in 0..np {
                            op[((offset + a) * np + p, (offset + b) * np + p)] = v;
                        }
                    }
                }
            }
            Ok(SymmetryOperator { kind: SymmetryKind::Doublet, entries: OperatorEntries::Dense(op) })
        }
    }
}

/// `⟨ψ|O|ψ⟩` for a state normalized to within `1e-10`.
pub fn expectation(op: &SymmetryOperator, state: &[C64]) -> Result<f64> {
    if state.len() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has length {}, operator has dimension {}",
            state.len(),
            op.dim()
        )));
    }
    let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm_sq));
    }
    let value = match &op.entries {
        OperatorEntries::Diagonal(d) => d.iter().zip(state).map(|(o, z)| o * z.norm_sqr()).sum(),
        OperatorEntries::Dense(_) => {
            let applied = op.apply(state);
            state.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum::<C64>().re
        }
    };
    Ok(value)
}
