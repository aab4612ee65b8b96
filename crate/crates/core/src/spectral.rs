//! Dense Hermitian eigendecomposition, coupling-matrix SVD with a fixed phase
//! convention, and Fock-cutoff convergence control.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{
    build_doublet, build_hamiltonian, build_parity, max_abs, CMatrix, DoubletBasis, HamiltonianMatrix,
    ModelSpec, SymmetryOperator,
};
use crate::radiation::to_radiation_basis;

/// Relative tolerance on `max|H - H†|` accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default ceiling for cutoff doubling.
pub const DEFAULT_MAX_CUTOFF: usize = 1 << 10;

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("matrix is {}×{}", m.nrows(), m.ncols())));
    }
    let scale = max_abs(m);
    let mut asymmetry = 0.0_f64;
    for c in 0..m.ncols() {
        for r in c..m.nrows() {
            asymmetry = asymmetry.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    if asymmetry > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { asymmetry, scale });
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors (column `i` ↔ eigenvalue `i`)
/// of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(m)?;
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenNoConvergence)?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenNoConvergence)
}

pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<(Vec<f64>, CMatrix)> {
    eigh(&h.matrix)
}

/// Spectrum of a matrix that is block diagonal with respect to integer
/// labels of the basis (parity, doublet type, ...).
#[derive(Clone, Debug)]
pub struct SectorEigen {
    pub values: Vec<f64>,
    /// Full-dimension eigenvectors, column `i` ↔ `values[i]`.
    pub vectors: Option<CMatrix>,
    pub labels: Vec<i64>,
}

/// Diagonalizes each label sector separately and merges the results in
/// ascending order (ties broken by label). Entries coupling different
/// sectors must vanish; they are not checked here.
pub fn sector_eigen(m: &CMatrix, labels: &[i64], with_vectors: bool) -> Result<SectorEigen> {
    let dim = m.nrows();
    if labels.len() != dim {
        return Err(Error::DimensionMismatch(format!("{} labels for dimension {dim}", labels.len())));
    }
    check_hermitian(m)?;
    let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        sectors.entry(l).or_default().push(i);
    }

    struct Pair {
        value: f64,
        label: i64,
        sector: usize,
        column: usize,
    }
    let mut pairs = Vec::with_capacity(dim);
    let mut sector_vectors = Vec::new();
    for (s, (label, idx)) in sectors.iter().enumerate() {
        let sub = Mat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        let values = if with_vectors {
            let evd = sub.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenNoConvergence)?;
            sector_vectors.push(evd.U().to_owned());
            evd.S().column_vector().iter().map(|z| z.re).collect::<Vec<_>>()
        } else {
            sub.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenNoConvergence)?
        };
        pairs.extend(values.into_iter().enumerate().map(|(column, value)| Pair {
            value,
            label: *label,
            sector: s,
            column,
        }));
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.label.cmp(&b.label)));

    let vectors = with_vectors.then(|| {
        let index_sets: Vec<&Vec<usize>> = sectors.values().collect();
        let mut full = Mat::<C64>::zeros(dim, dim);
        for (out, p) in pairs.iter().enumerate() {
            let local = &sector_vectors[p.sector];
            for (r, &global) in index_sets[p.sector].iter().enumerate() {
                full[(global, out)] = local[(r, p.column)];
            }
        }
        full
    });
    Ok(SectorEigen {
        values: pairs.iter().map(|p| p.value).collect(),
        vectors,
        labels: pairs.iter().map(|p| p.label).collect(),
    })
}

/// Parity-resolved spectrum of a Hamiltonian built in a [`crate::model::FockBasis`].
pub fn parity_eigen(h: &HamiltonianMatrix, with_vectors: bool) -> Result<SectorEigen> {
    let labels: Vec<i64> = (0..h.dim()).map(|i| i64::from(h.basis.parity(i))).collect();
    sector_eigen(&h.matrix, &labels, with_vectors)
}

/// Singular value decomposition of a coupling matrix `Λ` (`n × m`).
///
/// Row `k` of `u` holds the radiation ground state `|G_k⟩ = Σ_j u_kj |g_j⟩`
/// and row `k` of `v` the radiation excited state `|E_k⟩ = Σ_i v_ki |e_i⟩`,
/// so that `Λ = v† λ u` with `λ` the `n × m` pseudo-diagonal matrix of
/// singular values and `Σ_ij Λ_ij |g_j⟩⟨e_i| = Σ_k λ_k |G_k⟩⟨E_k|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    /// `m × m` unitary acting on the ground manifold.
    pub u: CMatrix,
    /// `n × n` unitary acting on the excited manifold.
    pub v: CMatrix,
    /// Descending, length `min(n, m)`.
    pub singular_values: Vec<f64>,
}

impl SvdResult {
    /// `v† λ u`.
    pub fn reconstruct(&self) -> CMatrix {
        let (n, m) = (self.v.nrows(), self.u.nrows());
        Mat::from_fn(n, m, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| self.v[(k, i)].conj() * *s * self.u[(k, j)])
                .sum()
        })
    }
}

/// Relative width of singular-value clusters treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

fn row_phase(m: &CMatrix, row: usize) -> C64 {
    let mags: Vec<f64> = (0..m.ncols()).map(|c| m[(row, c)].norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let pivot = mags.iter().position(|&x| x >= max * (1.0 - 1e-10)).unwrap_or(0);
    let z = m[(row, pivot)];
    // multiplying by conj(z)/|z| makes the pivot real positive
    z.conj() / z.norm()
}

fn scale_row(m: &mut CMatrix, row: usize, factor: C64) {
    for c in 0..m.ncols() {
        m[(row, c)] *= factor;
    }
}

fn fix_phase(m: &mut CMatrix, row: usize) {
    let ph = row_phase(m, row);
    scale_row(m, row, ph);
    // the pivot is real by construction; drop rounding residue
    let mags: Vec<f64> = (0..m.ncols()).map(|c| m[(row, c)].norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if let Some(p) = mags.iter().position(|&x| x >= max * (1.0 - 1e-10)) {
        m[(row, p)] = C64::new(m[(row, p)].norm(), 0.0);
    }
}

fn lex_cmp_rows(a: &CMatrix, ra: usize, rb: usize) -> Ordering {
    for c in 0..a.ncols() {
        let (x, y) = (a[(ra, c)], a[(rb, c)]);
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o.reverse();
        }
    }
    Ordering::Equal
}

fn permute_rows(m: &CMatrix, start: usize, order: &[usize]) -> CMatrix {
    let mut out = m.clone();
    for (dst, &src) in order.iter().enumerate() {
        for c in 0..m.ncols() {
            out[(start + dst, c)] = m[(start + src, c)];
        }
    }
    out
}

/// SVD with a deterministic gauge: in each radiation state the
/// largest-magnitude coefficient (lowest index on ties) is real positive,
/// with `|E_k⟩` following `|G_k⟩` for non-zero singular values. Degenerate
/// clusters are ordered by descending lexicographic comparison of `u` rows.
pub fn svd(coupling: &CMatrix) -> Result<SvdResult> {
    let (n, m) = (coupling.nrows(), coupling.ncols());
    if coupling.col_iter().flat_map(|c| c.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("coupling matrix has non-finite entries".into()));
    }
    let dec = coupling.svd().map_err(|_| Error::SvdNoConvergence)?;
    let (x, y) = (dec.U(), dec.V());
    let rank = n.min(m);
    let mut singular_values: Vec<f64> =
        dec.S().column_vector().iter().take(rank).map(|z| z.re.max(0.0)).collect();
    let mut u = Mat::from_fn(m, m, |k, j| y[(j, k)].conj());
    let mut v = Mat::from_fn(n, n, |k, i| x[(i, k)].conj());

    let s_max = singular_values.first().copied().unwrap_or(0.0);
    let zero_tol = DEGENERACY_TOL * s_max;
    for k in 0..rank {
        if singular_values[k] > zero_tol {
            let ph = row_phase(&u, k);
            scale_row(&mut u, k, ph);
            scale_row(&mut v, k, ph);
            // pivot of u is now real positive up to rounding
            fix_real_pivot(&mut u, k);
        } else {
            fix_phase(&mut u, k);
            fix_phase(&mut v, k);
        }
    }
    for k in rank..m {
        fix_phase(&mut u, k);
    }
    for k in rank..n {
        fix_phase(&mut v, k);
    }

    // order degenerate clusters
    let mut start = 0;
    while start < rank {
        let mut end = start + 1;
        while end < rank && singular_values[start] - singular_values[end] <= DEGENERACY_TOL * s_max.max(f64::MIN_POSITIVE) {
            end += 1;
        }
        if end - start > 1 {
            let mut order: Vec<usize> = (0..end - start).collect();
            order.sort_by(|&a, &b| lex_cmp_rows(&u, start + a, start + b));
            u = permute_rows(&u, start, &order);
            v = permute_rows(&v, start, &order);
            let cluster: Vec<f64> = order.iter().map(|&o| singular_values[start + o]).collect();
            singular_values[start..end].copy_from_slice(&cluster);
        }
        start = end;
    }
    for (mat, size) in [(&mut u, m), (&mut v, n)] {
        if size > rank + 1 {
            let mut order: Vec<usize> = (0..size - rank).collect();
            order.sort_by(|&a, &b| lex_cmp_rows(mat, rank + a, rank + b));
            *mat = permute_rows(mat, rank, &order);
        }
    }

    Ok(SvdResult { u, v, singular_values })
}

fn fix_real_pivot(m: &mut CMatrix, row: usize) {
    let mags: Vec<f64> = (0..m.ncols()).map(|c| m[(row, c)].norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(p) = mags.iter().position(|&x| x >= max * (1.0 - 1e-10)) {
        m[(row, p)] = C64::new(m[(row, p)].norm(), 0.0);
    }
}

/// Which doublet operator, if any, labels the eigenstates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DoubletLabels {
    #[default]
    None,
    Bare,
    Radiation,
}

#[derive(Clone, Debug)]
pub struct ConvergenceOptions {
    /// Number of lowest levels whose stability is tested.
    pub n_levels: usize,
    /// Tolerance in units of `ω`.
    pub tol: f64,
    pub max_cutoff: usize,
    pub doublet: DoubletLabels,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { n_levels: 12, tol: 1e-8, max_cutoff: DEFAULT_MAX_CUTOFF, doublet: DoubletLabels::None }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// All eigenvalues at `cutoff_used`, ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub parities: Vec<i8>,
    pub doublet_expectations: Option<Vec<f64>>,
    pub cutoff_used: usize,
    pub converged: bool,
    /// Largest change of a tracked eigenvalue over the last doubling.
    pub residual: f64,
    pub n_tracked: usize,
}

impl SpectrumResult {
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.col(i).iter().copied().collect()
    }
}

/// Doubles the Fock cutoff from `spec.fock_cutoff()` until the lowest
/// `n_levels` eigenvalues move by less than `tol · ω`.
pub fn converge_spectrum(spec: &ModelSpec, n_levels: usize, tol: f64) -> Result<SpectrumResult> {
    converge_spectrum_with(spec, &ConvergenceOptions { n_levels, tol, ..Default::default() })
}

/// Lowest eigenvalues at a converged cutoff, without eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergedLevels {
    /// The `n_tracked` lowest eigenvalues at `cutoff_used`, ascending.
    pub values: Vec<f64>,
    pub cutoff_used: usize,
    pub converged: bool,
    pub residual: f64,
}

/// Cutoff doubling loop shared by the spectrum drivers. Only eigenvalues
/// are computed.
pub fn converge_levels(spec: &ModelSpec, opts: &ConvergenceOptions) -> Result<ConvergedLevels> {
    if opts.n_levels == 0 {
        return Err(Error::Domain("n_levels must be ≥ 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain("tol must be > 0".into()));
    }
    let mut cutoff = spec.fock_cutoff().min(opts.max_cutoff).max(1);
    let atomic = spec.n_excited() + spec.n_ground();
    while atomic * (cutoff + 1) < opts.n_levels && cutoff < opts.max_cutoff {
        cutoff = (2 * cutoff).min(opts.max_cutoff);
    }
    let tracked = opts.n_levels.min(atomic * (cutoff + 1));

    let lowest = |c: usize| -> Result<Vec<f64>> {
        let h = build_hamiltonian(&spec.with_cutoff(c));
        let mut e = parity_eigen(&h, false)?.values;
        e.truncate(tracked);
        Ok(e)
    };

    let mut previous = lowest(cutoff)?;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while cutoff < opts.max_cutoff {
        let next_cutoff = (2 * cutoff).min(opts.max_cutoff);
        let current = lowest(next_cutoff)?;
        residual = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        cutoff = next_cutoff;
        previous = current;
        if residual < opts.tol * spec.omega() {
            converged = true;
            break;
        }
    }
    Ok(ConvergedLevels { values: previous, cutoff_used: cutoff, converged, residual })
}

pub fn converge_spectrum_with(spec: &ModelSpec, opts: &ConvergenceOptions) -> Result<SpectrumResult> {
    let ConvergedLevels { values, cutoff_used: cutoff, converged, residual } = converge_levels(spec, opts)?;
    let tracked = values.len();

    let final_spec = spec.with_cutoff(cutoff);
    let h = build_hamiltonian(&final_spec);
    let sectors = parity_eigen(&h, true)?;
    let eigenvectors = sectors.vectors.expect("vectors requested");
    let parity = build_parity(&final_spec);
    let parities = (0..eigenvectors.ncols())
        .map(|i| {
            let psi: Vec<C64> = eigenvectors.col(i).iter().copied().collect();
            parity.expectation(&psi).map(|p| if p >= 0.0 { 1 } else { -1 })
        })
        .collect::<Result<Vec<i8>>>()?;

    let doublet_op: Option<SymmetryOperator> = match opts.doublet {
        DoubletLabels::None => None,
        DoubletLabels::Bare => Some(build_doublet(&final_spec, DoubletBasis::Bare)?),
        DoubletLabels::Radiation => {
            let decomp = to_radiation_basis(&final_spec)?;
            Some(build_doublet(&final_spec, DoubletBasis::Radiation(&decomp))?)
        }
    };
    let doublet_expectations = doublet_op
        .map(|op| {
            (0..eigenvectors.ncols())
                .map(|i| {
                    let psi: Vec<C64> = eigenvectors.col(i).iter().copied().collect();
                    op.expectation(&psi)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .transpose()?;

    Ok(SpectrumResult {
        eigenvalues: sectors.values,
        eigenvectors,
        parities,
        doublet_expectations,
        cutoff_used: cutoff,
        converged,
        residual,
        n_tracked: tracked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Mat::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut h = Mat::from_fn(dim, dim, |r, c| a[(r, c)] + a[(c, r)].conj());
        for i in 0..dim {
            h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
        }
        h
    }

    fn random_complex(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn two_by_two_pauli_x() {
        let m = Mat::from_fn(2, 2, |r, c| if r != c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let (e, _) = eigh(&m).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |r, c| C64::new((r + 2 * c) as f64, 0.0));
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_coupling_spectrum_is_ladder() {
        let spec = ModelSpec::builder(1, 1).fock_cutoff(2).build().unwrap();
        let (e, _) = eigendecompose(&build_hamiltonian(&spec)).unwrap();
        assert_eq!(e, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let h = random_hermitian(50, 3);
        let (e, v) = eigh(&h).unwrap();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = Mat::from_fn(50, 50, |r, c| (0..50).map(|k| v[(r, k)] * e[k] * v[(c, k)].conj()).sum::<C64>());
        assert!(max_abs(&(&rebuilt - &h)) < 1e-9 * max_abs(&h));
        let gram = v.adjoint() * &v;
        for r in 0..50 {
            for c in 0..50 {
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((gram[(r, c)] - C64::new(target, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn sector_eigen_matches_full_spectrum() {
        let coupling = random_complex(2, 3, 11);
        let spec = ModelSpec::builder(2, 3)
            .coupling(coupling)
            .epsilon(0.05)
            .delta_e(vec![0.2, -0.7])
            .delta_g(vec![1.0, -1.0, 0.0])
            .fock_cutoff(10)
            .build()
            .unwrap();
        let h = build_hamiltonian(&spec);
        let full = eigendecompose(&h).unwrap().0;
        let sec = parity_eigen(&h, true).unwrap();
        for (a, b) in full.iter().zip(&sec.values) {
            assert!((a - b).abs() < 1e-10);
        }
        let v = sec.vectors.unwrap();
        for i in [0, 7, 20] {
            let psi: Vec<C64> = v.col(i).iter().copied().collect();
            let hpsi: Vec<C64> = (0..h.dim()).map(|r| (0..h.dim()).map(|c| h.matrix[(r, c)] * psi[c]).sum()).collect();
            let res = hpsi.iter().zip(&psi).map(|(a, b)| (a - b * sec.values[i]).norm()).fold(0.0, f64::max);
            assert!(res < 1e-9 * h.max_abs());
        }
    }

    #[test]
    fn svd_of_symmetric_two_by_two() {
        let (lambda, b) = (0.8, 0.3);
        let m = Mat::from_fn(2, 2, |r, c| C64::new(if r == c { lambda } else { lambda * b }, 0.0));
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - lambda * (1.0 + b)).abs() < 1e-14);
        assert!((s.singular_values[1] - lambda * (1.0 - b)).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // G_1 = (g_1 + g_2)/√2, G_2 = (g_1 - g_2)/√2
        for (k, sign) in [(0, 1.0), (1, -1.0)] {
            assert!((s.u[(k, 0)] - C64::new(h, 0.0)).norm() < 1e-14);
            assert!((s.u[(k, 1)] - C64::new(sign * h, 0.0)).norm() < 1e-14);
            assert!((s.v[(k, 0)] - C64::new(h, 0.0)).norm() < 1e-14);
            assert!((s.v[(k, 1)] - C64::new(sign * h, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn svd_uniform_and_rank_one() {
        let n = 6;
        let lambda = 0.37;
        let m = Mat::from_fn(n, n, |_, _| C64::new(lambda, 0.0));
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - n as f64 * lambda).abs() < 1e-12 * n as f64 * lambda);
        assert!(s.singular_values[1..].iter().all(|x| *x <= 1e-12 * n as f64 * lambda));

        let v = [C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.1, 0.0)];
        let w = [C64::new(1.0, -0.4), C64::new(0.2, 0.9)];
        let r1 = Mat::from_fn(3, 2, |i, j| v[i] * w[j]);
        let s = svd(&r1).unwrap();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nw: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((s.singular_values[0] - nv * nw).abs() < 1e-12 * nv * nw);
        assert!(s.singular_values[1] < 1e-12 * nv * nw);
    }

    #[test]
    fn svd_matches_wishart_eigenvalues() {
        let m = random_complex(5, 3, 21);
        let s = svd(&m).unwrap();
        let w = &m * m.adjoint();
        let (mut kappa, _) = eigh(&w).unwrap();
        kappa.reverse();
        for (sv, k) in s.singular_values.iter().zip(&kappa) {
            assert!((sv - k.max(0.0).sqrt()).abs() < 1e-12);
        }
        assert!(kappa[3..].iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn svd_phase_convention_holds() {
        let m = random_complex(4, 3, 5);
        let s = svd(&m).unwrap();
        // v rows with non-zero σ inherit the phase of u; only the rest are fixed
        for (mat, first) in [(&s.u, 0), (&s.v, s.singular_values.len())] {
            for k in first..mat.nrows() {
                let mags: Vec<f64> = (0..mat.ncols()).map(|c| mat[(k, c)].norm()).collect();
                let max = mags.iter().copied().fold(0.0, f64::max);
                let p = mags.iter().position(|&x| x >= max * (1.0 - 1e-10)).unwrap();
                let z = mat[(k, p)];
                assert!(z.re > 0.0 && z.im.abs() < 1e-12 * z.re, "row {k}: {z}");
            }
        }
        assert_eq!(svd(&m).unwrap(), s);
        let r = s.reconstruct();
        for i in 0..4 {
            for j in 0..3 {
                assert!((r[(i, j)] - m[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn convergence_is_immediate_without_coupling() {
        let spec = ModelSpec::builder(1, 1).fock_cutoff(8).build().unwrap();
        let r = converge_spectrum(&spec, 4, 1e-10).unwrap();
        assert!(r.converged);
        assert_eq!(r.cutoff_used, 16);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn deep_coupling_needs_larger_cutoff() {
        let tol = 1e-8;
        let weak = converge_spectrum(&ModelSpec::qrm(0.5, 1.0, 4).unwrap(), 2, tol).unwrap();
        let strong = converge_spectrum(&ModelSpec::qrm(2.5, 1.0, 4).unwrap(), 2, tol).unwrap();
        assert!(weak.converged && strong.converged);
        assert!(strong.cutoff_used > weak.cutoff_used);
        // one more doubling leaves the tracked levels in place
        let check = build_hamiltonian(&ModelSpec::qrm(2.5, 1.0, 2 * strong.cutoff_used).unwrap());
        let e = parity_eigen(&check, false).unwrap().values;
        for i in 0..2 {
            assert!((e[i] - strong.eigenvalues[i]).abs() < tol);
        }
        assert!(strong.parities[0] != strong.parities[1]);
    }

    #[test]
    fn ceiling_reports_non_convergence() {
        let spec = ModelSpec::qrm(3.0, 1.0, 2).unwrap();
        let opts = ConvergenceOptions { n_levels: 4, tol: 1e-12, max_cutoff: 8, ..Default::default() };
        let r = converge_spectrum_with(&spec, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.cutoff_used, 8);
        assert!(r.residual > 1e-12);
    }

    #[test]
    fn lowest_level_decreases_with_cutoff() {
        let coupling = random_complex(2, 2, 9);
        let spec = ModelSpec::degenerate(coupling, 2).unwrap();
        let mut last = f64::INFINITY;
        for c in [2, 4, 8, 16, 32] {
            let e = parity_eigen(&build_hamiltonian(&spec.with_cutoff(c)), false).unwrap().values[0];
            assert!(e <= last + 1e-12);
            last = e;
        }
    }
}
