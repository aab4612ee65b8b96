//! Avoided crossings of the detuned two-doublet model.
//!
//! The coupling is `λ M` with a fixed non-diagonal `M = [[1, b], [b, 1]]`, so
//! the radiation states are superpositions of bare levels and the detuning
//! term mixes the two Rabi families. All diagonalization happens in the
//! radiation basis of `M`, where the doublet operator is diagonal and `⟨D⟩`
//! is a weighted norm of the eigenvector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{golden_min, parity_labels, real_matrix, CutoffPolicy, ExperimentRecord};
use crate::error::{Error, Result};
use crate::model::{FockBasis, HamiltonianMatrix, ModelSpec};
use crate::radiation::{assemble_radiation_hamiltonian, to_radiation_basis, RadiationDecomposition};
use crate::spectral::sector_eigen;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Options {
    pub epsilon: f64,
    /// `(δ_1, δ_2)`, applied to both the excited and the ground manifold.
    pub deltas: (f64, f64),
    /// Off-diagonal element `b` of the coupling shape.
    pub offdiagonal: f64,
    pub lambda_grid: Vec<f64>,
    /// Levels reported per grid point.
    pub levels: usize,
    pub cutoff_policy: CutoffPolicy,
    /// Distance either side of the closest approach at which `⟨D⟩` is compared.
    pub swap_offset: f64,
}

impl Default for Fig3Options {
    fn default() -> Self {
        Self {
            epsilon: 0.015,
            deltas: (-1.0, 1.0),
            offdiagonal: 0.5,
            lambda_grid: super::linear_grid(0.0, 1.5, 300),
            levels: 8,
            cutoff_policy: CutoffPolicy::default(),
            swap_offset: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Level {
    pub energy: f64,
    pub parity: i8,
    pub doublet_expectation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Point {
    pub lambda: f64,
    pub levels: Vec<Fig3Level>,
}

/// A crossing of two levels of one parity sector at `ε = 0` together with
/// the avoided crossing it turns into at finite `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub parity: i8,
    /// Index of the lower level within its parity sector.
    pub sector_level: usize,
    /// Location of the exact crossing at `ε = 0`.
    pub lambda: f64,
    pub gap_undetuned: f64,
    /// Location of the minimum gap at finite `ε`.
    pub lambda_detuned: f64,
    pub gap_detuned: f64,
    /// `⟨D⟩` of the lower and upper branch at `lambda_detuned - swap_offset`.
    pub doublet_before: [f64; 2],
    /// Same at `lambda_detuned + swap_offset`.
    pub doublet_after: [f64; 2],
}

impl Crossing {
    /// Change of `⟨D⟩` along the lower branch across the anticrossing.
    pub fn doublet_swap(&self) -> f64 {
        (self.doublet_before[0] - self.doublet_after[0]).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Output {
    pub epsilon: f64,
    pub cutoff_used: usize,
    pub converged: bool,
    pub detuned: Vec<Fig3Point>,
    pub undetuned: Vec<Fig3Point>,
    pub crossings: Vec<Crossing>,
    /// Index into `crossings` of the crossing at the smallest coupling among
    /// those involving only the three lowest levels of a parity sector.
    pub primary: Option<usize>,
}

impl Fig3Output {
    pub fn primary_crossing(&self) -> Option<&Crossing> {
        self.primary.map(|i| &self.crossings[i])
    }

    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut out = Vec::new();
        for (id, points) in [("fig3.detuned", &self.detuned), ("fig3.undetuned", &self.undetuned)] {
            for p in points {
                for (i, l) in p.levels.iter().enumerate() {
                    let mut r = ExperimentRecord::new(id, p.lambda, i);
                    r.energy = Some(l.energy);
                    r.parity = Some(l.parity);
                    r.doublet_expectation = Some(l.doublet_expectation);
                    r.cutoff_used = Some(self.cutoff_used);
                    r.converged = Some(self.converged);
                    out.push(r);
                }
            }
        }
        for (i, c) in self.crossings.iter().enumerate() {
            let mut r = ExperimentRecord::new("fig3.crossing", c.lambda_detuned, c.sector_level)
                .with_extra("lambda_undetuned", super::ExtraValue::Real(c.lambda))
                .with_extra("gap_undetuned", super::ExtraValue::Real(c.gap_undetuned))
                .with_extra("gap_detuned", super::ExtraValue::Real(c.gap_detuned))
                .with_extra("doublet_before", super::ExtraValue::Reals(c.doublet_before.to_vec()))
                .with_extra("doublet_after", super::ExtraValue::Reals(c.doublet_after.to_vec()))
                .with_extra("primary", super::ExtraValue::Int(i64::from(self.primary == Some(i))));
            r.parity = Some(c.parity);
            r.cutoff_used = Some(self.cutoff_used);
            r.converged = Some(self.converged);
            out.push(r);
        }
        out
    }
}

/// The detuned model in the radiation basis of the unit-strength coupling.
struct Model {
    spec: ModelSpec,
    decomp: RadiationDecomposition,
    types: Vec<i64>,
}

impl Model {
    fn new(opts: &Fig3Options, epsilon: f64, cutoff: usize) -> Result<Self> {
        let spec = unit_spec(opts, epsilon)?.with_cutoff(cutoff);
        let decomp = to_radiation_basis(&spec)?;
        let basis = FockBasis::new(2, 2, cutoff);
        let rank = decomp.effective_couplings.len();
        let types = (0..basis.dim())
            .map(|i| {
                let a = i / basis.n_photon_states();
                let k = if a < basis.n_ground { a } else { a - basis.n_ground };
                if k < rank {
                    k as i64 + 1
                } else {
                    0
                }
            })
            .collect();
        Ok(Self { spec, decomp, types })
    }

    fn hamiltonian(&self, lambda: f64) -> Result<HamiltonianMatrix> {
        let mut d = self.decomp.clone();
        for s in d.effective_couplings.iter_mut().chain(d.svd.singular_values.iter_mut()) {
            *s *= lambda;
        }
        assemble_radiation_hamiltonian(&d, &self.spec)
    }

    /// Levels of one parity sector (ascending) with `⟨D⟩`.
    fn sector(&self, lambda: f64, parity: i8) -> Result<Vec<Fig3Level>> {
        Ok(self.levels(lambda)?.into_iter().filter(|l| l.parity == parity).collect())
    }

    fn levels(&self, lambda: f64) -> Result<Vec<Fig3Level>> {
        let h = self.hamiltonian(lambda)?;
        let labels = parity_labels(&h.basis);
        let s = sector_eigen(&h.matrix, &labels, true)?;
        let vectors = s.vectors.expect("vectors requested");
        Ok(s.values
            .iter()
            .zip(&s.labels)
            .enumerate()
            .map(|(col, (&energy, &p))| {
                let d = self.types.iter().enumerate().map(|(r, &t)| t as f64 * vectors[(r, col)].norm_sqr()).sum();
                Fig3Level { energy, parity: p as i8, doublet_expectation: d }
            })
            .collect())
    }

    /// Sector levels labelled by exact doublet type; valid only at `ε = 0`.
    fn typed_sector(&self, lambda: f64, parity: i8) -> Result<Vec<(f64, i64)>> {
        let h = self.hamiltonian(lambda)?;
        let labels: Vec<i64> =
            (0..h.dim()).map(|i| 2 * self.types[i] + i64::from(h.basis.parity(i) > 0)).collect();
        let s = sector_eigen(&h.matrix, &labels, false)?;
        let want = i64::from(parity > 0);
        Ok(s.values.iter().zip(&s.labels).filter(|(_, l)| *l % 2 == want).map(|(&e, &l)| (e, l / 2)).collect())
    }

    fn sector_gap(&self, lambda: f64, parity: i8, level: usize) -> Result<f64> {
        let s = self.sector(lambda, parity)?;
        Ok(s[level + 1].energy - s[level].energy)
    }
}

fn unit_spec(opts: &Fig3Options, epsilon: f64) -> Result<ModelSpec> {
    let b = opts.offdiagonal;
    let deltas = vec![opts.deltas.0, opts.deltas.1];
    ModelSpec::builder(2, 2)
        .epsilon(epsilon)
        .delta_e(deltas.clone())
        .delta_g(deltas)
        .coupling(real_matrix(2, 2, |i, j| if i == j { 1.0 } else { b }))
        .build()
}

const REFINE_ITERATIONS: usize = 200;

/// Sweeps `λ` for the `n = m = 2` model with coupling `λ [[1, b], [b, 1]]`,
/// with and without detuning, and locates every crossing between adjacent
/// levels of a parity sector that the grid resolves. Each crossing is refined
/// by golden-section search at `ε = 0` and again at finite `ε`.
pub fn run_fig3_anticrossing(opts: &Fig3Options) -> Result<Fig3Output> {
    if !(opts.epsilon.is_finite() && opts.epsilon >= 0.0) {
        return Err(Error::Domain(format!("epsilon must be ≥ 0, got {}", opts.epsilon)));
    }
    if opts.lambda_grid.len() < 2 || opts.lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("coupling grid must be strictly increasing with ≥ 2 points".into()));
    }
    if opts.lambda_grid[0] < 0.0 {
        return Err(Error::Domain("coupling grid values must be ≥ 0".into()));
    }
    let lambda_max = *opts.lambda_grid.last().expect("non-empty");
    let probe = unit_spec(opts, opts.epsilon)?.scaled_coupling(lambda_max);
    let (cutoff, converged, _) = opts.cutoff_policy.resolve(&probe, lambda_max, opts.levels)?;

    let detuned_model = Model::new(opts, opts.epsilon, cutoff)?;
    let bare_model = Model::new(opts, 0.0, cutoff)?;
    let sweep = |model: &Model| -> Result<Vec<Fig3Point>> {
        opts.lambda_grid
            .par_iter()
            .map(|&lambda| {
                let mut levels = model.levels(lambda)?;
                levels.truncate(opts.levels);
                Ok(Fig3Point { lambda, levels })
            })
            .collect()
    };
    let detuned = sweep(&detuned_model)?;
    let undetuned = sweep(&bare_model)?;

    // bracket crossings by swaps of exact doublet labels at ε = 0
    let per_sector = opts.levels.div_ceil(2).max(2);
    let typed: Vec<[Vec<(f64, i64)>; 2]> = opts
        .lambda_grid
        .par_iter()
        .map(|&l| Ok([bare_model.typed_sector(l, -1)?, bare_model.typed_sector(l, 1)?]))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for (si, parity) in [(0usize, -1i8), (1, 1)] {
        for level in 0..per_sector - 1 {
            for i in 0..opts.lambda_grid.len() - 1 {
                let (a, b) = (&typed[i][si], &typed[i + 1][si]);
                if a.len() <= level + 1 || b.len() <= level + 1 {
                    continue;
                }
                let (t0, t1) = (a[level].1, a[level + 1].1);
                if t0 != t1 && b[level].1 == t1 && b[level + 1].1 == t0 {
                    brackets.push((parity, level, opts.lambda_grid[i], opts.lambda_grid[i + 1]));
                }
            }
        }
    }

    let mut crossings = brackets
        .par_iter()
        .map(|&(parity, level, lo, hi)| {
            let (lambda, gap_undetuned) =
                golden_min(|l| bare_model.sector_gap(l, parity, level), lo, hi, REFINE_ITERATIONS)?;
            let w = (hi - lo).max(opts.swap_offset);
            let (lambda_detuned, gap_detuned) = golden_min(
                |l| detuned_model.sector_gap(l, parity, level),
                (lambda - w).max(0.0),
                lambda + w,
                REFINE_ITERATIONS,
            )?;
            let pair = |l: f64| -> Result<[f64; 2]> {
                let s = detuned_model.sector(l, parity)?;
                Ok([s[level].doublet_expectation, s[level + 1].doublet_expectation])
            };
            Ok(Crossing {
                parity,
                sector_level: level,
                lambda,
                gap_undetuned,
                lambda_detuned,
                gap_detuned,
                doublet_before: pair((lambda_detuned - opts.swap_offset).max(0.0))?,
                doublet_after: pair(lambda_detuned + opts.swap_offset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    crossings.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let primary = crossings
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sector_level <= 1)
        .min_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
        .map(|(i, _)| i);

    Ok(Fig3Output { epsilon: opts.epsilon, cutoff_used: cutoff, converged, detuned, undetuned, crossings, primary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use crate::spectral::eigvalsh;

    fn quick() -> Fig3Options {
        Fig3Options { lambda_grid: super::super::linear_grid(0.0, 1.0, 100), ..Default::default() }
    }

    fn quick_run() -> &'static Fig3Output {
        static OUT: std::sync::OnceLock<Fig3Output> = std::sync::OnceLock::new();
        OUT.get_or_init(|| run_fig3_anticrossing(&quick()).unwrap())
    }

    #[test]
    fn radiation_sweep_matches_bare_hamiltonian() {
        let opts = quick();
        let model = Model::new(&opts, opts.epsilon, 24).unwrap();
        let lambda = 0.6;
        let ours: Vec<f64> = model.levels(lambda).unwrap().iter().map(|l| l.energy).collect();
        let bare = build_hamiltonian(&unit_spec(&opts, opts.epsilon).unwrap().scaled_coupling(lambda).with_cutoff(24));
        let reference = eigvalsh(&bare.matrix).unwrap();
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn undetuned_doublet_is_sharp() {
        let out = quick_run();
        for p in &out.undetuned[1..] {
            for l in &p.levels {
                let d = l.doublet_expectation;
                // degenerate pairs may mix types; everything else is an eigenstate of D
                assert!(d > 1.0 - 1e-9 && d < 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn lowest_odd_crossing_opens_with_detuning() {
        let out = quick_run();
        let c = out.primary_crossing().expect("crossing found");
        assert_eq!((c.parity, c.sector_level), (-1, 1));
        assert!((c.lambda - 0.673).abs() < 0.01, "{c:?}");
        assert!(c.gap_undetuned < 1e-9, "{c:?}");
        assert!(c.gap_detuned > 0.5 * out.epsilon && c.gap_detuned < 4.0 * out.epsilon, "{c:?}");
        assert!(c.doublet_swap() > 0.8, "{c:?}");
    }

    #[test]
    fn records_include_crossings() {
        let out = quick_run();
        let recs = out.records();
        assert!(recs.iter().any(|r| r.experiment_id == "fig3.crossing"
            && r.extra.get("primary") == Some(&super::super::ExtraValue::Int(1))));
        assert_eq!(recs.iter().filter(|r| r.experiment_id == "fig3.detuned").count(), 101 * 8);
    }
}
