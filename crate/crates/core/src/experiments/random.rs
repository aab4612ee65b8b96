//! Randomly coupled `n × n` models with the largest singular value pinned to
//! `λ₁`: the energy-density heatmap and the ground-pair histogram.

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{equally_spaced_detunings, window_cutoff, ExperimentRecord, ExtraValue};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, CMatrix, ModelSpec};
use crate::rmt::ensemble::{largest_singular_value, sample_ginibre_stream, trial_stream, Ensemble};
use crate::spectral::{converge_levels, parity_eigen, ConvergenceOptions, DEFAULT_MAX_CUTOFF};

/// `systems` complex Ginibre matrices divided by their largest singular
/// value. System `s` is drawn from stream `trial_stream(n, n, s)` of `seed`.
pub fn normalized_couplings(n: usize, systems: usize, seed: u64) -> Result<Vec<CMatrix>> {
    (0..systems as u64)
        .into_par_iter()
        .map(|s| {
            let g = sample_ginibre_stream(n, n, Ensemble::Complex, seed, trial_stream(n, n, s));
            let top = largest_singular_value(&g)?;
            if !(top > 0.0) {
                return Err(Error::Domain("sampled a zero coupling matrix".into()));
            }
            Ok(Mat::from_fn(n, n, |i, j| g[(i, j)] / top))
        })
        .collect()
}

/// `λ₁ · shape` with both manifolds detuned by `ε δ`, `δ` equally spaced on
/// `[-1, 1]` in level order.
pub fn detuned_model(shape: &CMatrix, lambda1: f64, epsilon: f64, cutoff: usize) -> Result<ModelSpec> {
    let (n, m) = (shape.nrows(), shape.ncols());
    ModelSpec::builder(n, m)
        .epsilon(epsilon)
        .delta_e(equally_spaced_detunings(n))
        .delta_g(equally_spaced_detunings(m))
        .coupling(Mat::from_fn(n, m, |i, j| shape[(i, j)] * lambda1))
        .fock_cutoff(cutoff)
        .build()
}

/// Eigenvalues shifted by `λ₁²/ω`.
fn shifted_spectrum(spec: &ModelSpec, lambda1: f64) -> Result<Vec<f64>> {
    let shift = lambda1 * lambda1 / spec.omega();
    let values = parity_eigen(&build_hamiltonian(spec), false)?.values;
    if values.iter().any(|e| !e.is_finite()) {
        return Err(Error::Precision("non-finite eigenvalue".into()));
    }
    Ok(values.into_iter().map(|e| e + shift).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig4Options {
    pub n: usize,
    pub systems: usize,
    pub lambda_max: f64,
    /// `(coupling bins, energy bins)`; one grid point per coupling bin centre.
    pub bins: (usize, usize),
    /// Upper edge of the shifted-energy window `[0, energy_max)`.
    pub energy_max: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// A system is excluded when its windowed levels at the largest coupling
    /// move by more than this under a 50% larger cutoff.
    pub validation_tol: f64,
}

impl Default for Fig4Options {
    fn default() -> Self {
        Self {
            n: 5,
            systems: 600,
            lambda_max: 3.0,
            bins: (1000, 1250),
            energy_max: 6.0,
            epsilon: 0.05,
            seed: 0,
            validation_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig4Output {
    pub seed: u64,
    pub systems: usize,
    pub lambda_edges: Vec<f64>,
    pub energy_edges: Vec<f64>,
    /// `counts[c][b]`: levels of all systems in coupling column `c` and energy bin `b`.
    pub counts: Vec<Vec<u64>>,
    /// Shifted 2-level Rabi levels at each column centre that fall below the window top.
    pub overlay: Vec<Vec<f64>>,
    pub cutoffs: Vec<usize>,
    /// Systems dropped by the cutoff validation.
    pub excluded: Vec<usize>,
}

impl Fig4Output {
    pub fn lambda_centres(&self) -> Vec<f64> {
        self.lambda_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn energy_bin_coordinate(&self, e: f64) -> f64 {
        let lo = self.energy_edges[0];
        let width = self.energy_edges[1] - lo;
        (e - lo) / width
    }

    /// Fraction of non-empty columns whose most populated energy bin lies
    /// within `max_bins` bins of one of the overlaid Rabi levels.
    pub fn ridge_alignment(&self, max_bins: f64) -> f64 {
        let mut total = 0usize;
        let mut aligned = 0usize;
        for (col, levels) in self.counts.iter().zip(&self.overlay) {
            let Some((peak, &count)) = col.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            else {
                continue;
            };
            if count == 0 {
                continue;
            }
            total += 1;
            let centre = peak as f64 + 0.5;
            if levels.iter().any(|&e| (self.energy_bin_coordinate(e) - centre).abs() <= max_bins + 0.5) {
                aligned += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            aligned as f64 / total as f64
        }
    }

    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut out = Vec::new();
        let mut meta = ExperimentRecord::new("fig4.summary", 0.0, 0)
            .with_extra("lambda_edges", ExtraValue::Reals(self.lambda_edges.clone()))
            .with_extra("energy_edges", ExtraValue::Reals(self.energy_edges.clone()))
            .with_extra("systems", ExtraValue::Int(self.systems as i64))
            .with_extra("excluded", ExtraValue::Ints(self.excluded.iter().map(|&s| s as i64).collect()));
        meta.seed = Some(self.seed);
        out.push(meta);
        for (c, lambda) in self.lambda_centres().into_iter().enumerate() {
            let mut r = ExperimentRecord::new("fig4.histogram", lambda, c)
                .with_extra("counts", ExtraValue::Ints(self.counts[c].iter().map(|&x| x as i64).collect()));
            r.seed = Some(self.seed);
            r.cutoff_used = Some(self.cutoffs[c]);
            out.push(r);
            for (k, &e) in self.overlay[c].iter().enumerate() {
                let mut r = ExperimentRecord::new("fig4.overlay", lambda, k);
                r.energy = Some(e - lambda * lambda);
                r.shifted_energy = Some(e);
                r.cutoff_used = Some(self.cutoffs[c]);
                out.push(r);
            }
        }
        out
    }
}

fn validate(opts: &Fig4Options, shape: &CMatrix, lambda: f64) -> Result<bool> {
    let cutoff = window_cutoff(opts.energy_max, lambda);
    let a = shifted_spectrum(&detuned_model(shape, lambda, opts.epsilon, cutoff)?, lambda)?;
    let b = shifted_spectrum(&detuned_model(shape, lambda, opts.epsilon, cutoff + cutoff.div_ceil(2))?, lambda)?;
    Ok(a.iter().zip(&b).take_while(|(x, _)| **x < opts.energy_max).all(|(x, y)| (x - y).abs() <= opts.validation_tol))
}

/// Density of shifted energies `E/ω + (λ₁/ω)²` of `systems` random models
/// over a grid of `λ₁`, with the 2-level Rabi levels at `λ = λ₁` as overlay.
/// Columns are independent work items; counts are integers, so the result
/// does not depend on the number of workers.
pub fn run_fig4_heatmap(opts: &Fig4Options) -> Result<Fig4Output> {
    let (n_lambda, n_energy) = opts.bins;
    if opts.n == 0 || opts.systems == 0 || n_lambda == 0 || n_energy == 0 {
        return Err(Error::Domain("size, systems and bin counts must be positive".into()));
    }
    if !(opts.lambda_max > 0.0 && opts.energy_max > 0.0 && opts.epsilon >= 0.0) {
        return Err(Error::Domain("lambda_max and energy_max must be > 0 and epsilon ≥ 0".into()));
    }
    let lambda_edges = super::linear_grid(0.0, opts.lambda_max, n_lambda);
    let energy_edges = super::linear_grid(0.0, opts.energy_max, n_energy);
    let centres: Vec<f64> = lambda_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let shapes = normalized_couplings(opts.n, opts.systems, opts.seed)?;

    let top = *centres.last().expect("non-empty");
    let keep: Vec<bool> = shapes.par_iter().map(|s| validate(opts, s, top)).collect::<Result<_>>()?;
    let excluded: Vec<usize> = keep.iter().enumerate().filter(|(_, k)| !**k).map(|(i, _)| i).collect();

    let columns = centres
        .par_iter()
        .map(|&lambda| -> Result<(Vec<u64>, Vec<f64>, usize)> {
            let cutoff = window_cutoff(opts.energy_max, lambda);
            let mut counts = vec![0u64; n_energy];
            for (shape, _) in shapes.iter().zip(&keep).filter(|(_, k)| **k) {
                let spec = detuned_model(shape, lambda, opts.epsilon, cutoff)?;
                for e in shifted_spectrum(&spec, lambda)? {
                    if e >= opts.energy_max {
                        break;
                    }
                    if e >= 0.0 {
                        let b = ((e / opts.energy_max) * n_energy as f64) as usize;
                        counts[b.min(n_energy - 1)] += 1;
                    }
                }
            }
            let qrm = ModelSpec::qrm(lambda, 1.0, cutoff)?;
            let overlay: Vec<f64> =
                shifted_spectrum(&qrm, lambda)?.into_iter().take_while(|&e| e < opts.energy_max).collect();
            Ok((counts, overlay, cutoff))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = Vec::with_capacity(n_lambda);
    let mut overlay = Vec::with_capacity(n_lambda);
    let mut cutoffs = Vec::with_capacity(n_lambda);
    for (c, o, k) in columns {
        counts.push(c);
        overlay.push(o);
        cutoffs.push(k);
    }
    Ok(Fig4Output { seed: opts.seed, systems: opts.systems, lambda_edges, energy_edges, counts, overlay, cutoffs, excluded })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Options {
    pub n: usize,
    pub systems: usize,
    pub lambda1: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Convergence tolerance of the two lowest levels, in units of `ω`.
    pub tol: f64,
    pub max_cutoff: usize,
}

impl Default for Fig5Options {
    fn default() -> Self {
        Self { n: 5, systems: 600, lambda1: 2.5, epsilon: 0.05, seed: 0, tol: 1e-11, max_cutoff: DEFAULT_MAX_CUTOFF }
    }
}

/// Two lowest shifted energies of one model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundPair {
    pub energies: [f64; 2],
    pub cutoff_used: usize,
    pub converged: bool,
}

impl GroundPair {
    pub fn splitting(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Output {
    pub seed: u64,
    pub lambda1: f64,
    pub epsilon: f64,
    /// Random coupling with detunings.
    pub samples: Vec<GroundPair>,
    /// Same couplings at `ε = 0`.
    pub undetuned: Vec<GroundPair>,
    /// Uniform coupling `Λ_ij = λ₁/n` with detunings.
    pub uniform: GroundPair,
}

fn mean_std(x: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = x.clone().count() as f64;
    let mean = x.clone().sum::<f64>() / n;
    let var = x.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

impl Fig5Output {
    /// Mean and sample standard deviation of the lowest shifted energy over
    /// the detuned random systems.
    pub fn ground_statistics(&self) -> (f64, f64) {
        mean_std(self.samples.iter().map(|p| p.energies[0]))
    }

    pub fn max_undetuned_splitting(&self) -> f64 {
        self.undetuned.iter().map(GroundPair::splitting).fold(0.0, f64::max)
    }

    pub fn unconverged(&self) -> usize {
        self.samples.iter().chain(&self.undetuned).chain([&self.uniform]).filter(|p| !p.converged).count()
    }

    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut out = Vec::new();
        let mut push = |id: &str, system: Option<usize>, p: &GroundPair| {
            for (l, &e) in p.energies.iter().enumerate() {
                let mut r = ExperimentRecord::new(id, self.lambda1, l);
                r.energy = Some(e - self.lambda1 * self.lambda1);
                r.shifted_energy = Some(e);
                r.cutoff_used = Some(p.cutoff_used);
                r.converged = Some(p.converged);
                r.seed = Some(self.seed);
                if let Some(s) = system {
                    r = r.with_extra("system", ExtraValue::Int(s as i64));
                }
                out.push(r);
            }
        };
        for (s, p) in self.samples.iter().enumerate() {
            push("fig5.sample", Some(s), p);
        }
        for (s, p) in self.undetuned.iter().enumerate() {
            push("fig5.undetuned", Some(s), p);
        }
        push("fig5.uniform", None, &self.uniform);
        let (mean, std) = self.ground_statistics();
        let mut r = ExperimentRecord::new("fig5.summary", self.lambda1, 0)
            .with_extra("ground_mean", ExtraValue::Real(mean))
            .with_extra("ground_std", ExtraValue::Real(std))
            .with_extra("uniform_splitting", ExtraValue::Real(self.uniform.splitting()))
            .with_extra("max_undetuned_splitting", ExtraValue::Real(self.max_undetuned_splitting()));
        r.seed = Some(self.seed);
        out.push(r);
        out
    }
}

fn ground_pair(spec: &ModelSpec, lambda1: f64, opts: &Fig5Options) -> Result<GroundPair> {
    let copts = ConvergenceOptions { n_levels: 2, tol: opts.tol, max_cutoff: opts.max_cutoff, ..Default::default() };
    let r = converge_levels(spec, &copts)?;
    let shift = lambda1 * lambda1 / spec.omega();
    Ok(GroundPair { energies: [r.values[0] + shift, r.values[1] + shift], cutoff_used: r.cutoff_used, converged: r.converged })
}

/// Two lowest shifted energies of `systems` random detuned models at `λ₁`,
/// the same couplings without detuning, and the uniform-coupling reference.
pub fn run_fig5_groundstate_histogram(opts: &Fig5Options) -> Result<Fig5Output> {
    if opts.n == 0 || opts.systems == 0 {
        return Err(Error::Domain("size and systems must be positive".into()));
    }
    if !(opts.lambda1 >= 0.0 && opts.epsilon >= 0.0 && opts.tol > 0.0) {
        return Err(Error::Domain("lambda1 and epsilon must be ≥ 0, tol > 0".into()));
    }
    let start = window_cutoff(1.0, opts.lambda1);
    let shapes = normalized_couplings(opts.n, opts.systems, opts.seed)?;
    let pairs = shapes
        .par_iter()
        .map(|shape| -> Result<(GroundPair, GroundPair)> {
            let detuned = ground_pair(&detuned_model(shape, opts.lambda1, opts.epsilon, start)?, opts.lambda1, opts)?;
            let undetuned = ground_pair(&detuned_model(shape, opts.lambda1, 0.0, start)?, opts.lambda1, opts)?;
            Ok((detuned, undetuned))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = opts.n;
    let uniform_shape = Mat::from_fn(n, n, |_, _| C64::new(1.0 / n as f64, 0.0));
    let uniform = ground_pair(&detuned_model(&uniform_shape, opts.lambda1, opts.epsilon, start)?, opts.lambda1, opts)?;
    let (samples, undetuned) = pairs.into_iter().unzip();
    Ok(Fig5Output { seed: opts.seed, lambda1: opts.lambda1, epsilon: opts.epsilon, samples, undetuned, uniform })
}
