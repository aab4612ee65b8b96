//! Deterministic sweeps that regenerate the data behind the published
//! figures. Every pipeline is a pure function of its options (including the
//! seed) and returns a typed result that flattens into [`ExperimentRecord`]
//! rows for serialization.

mod appendix;
mod fig1;
mod fig3;
mod random;

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CMatrix, FockBasis, ModelSpec};
use crate::spectral::{converge_levels, ConvergenceOptions, DEFAULT_MAX_CUTOFF};

pub use appendix::{run_appendix_sv_stats, AppendixOptions, AppendixOutput, SvHistogram, SvMomentRow};
pub use fig1::{run_fig1_diagonal_spectra, Fig1Level, Fig1Options, Fig1Output, Fig1Point};
pub use fig3::{run_fig3_anticrossing, Crossing, Fig3Level, Fig3Options, Fig3Output, Fig3Point};
pub use random::{
    detuned_model, normalized_couplings, run_fig4_heatmap, run_fig5_groundstate_histogram, Fig4Options, Fig4Output,
    Fig5Options, Fig5Output, GroundPair,
};

/// Version of the [`ExperimentRecord`] layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Auxiliary per-row data (histogram counts, bin edges, summary numbers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtraValue {
    Int(i64),
    Real(f64),
    Text(String),
    Ints(Vec<i64>),
    Reals(Vec<f64>),
}

/// One row of figure data.
///
/// `energy` is always the raw eigenvalue in units of `ω`; `shifted_energy`
/// is present only when the `(λ/ω)²` display shift applies to the row.
/// Histogram and summary rows carry neither and keep their payload in
/// `extra`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub experiment_id: String,
    pub sweep_value: f64,
    pub seed: Option<u64>,
    pub level_index: usize,
    pub energy: Option<f64>,
    pub shifted_energy: Option<f64>,
    pub parity: Option<i8>,
    pub doublet_expectation: Option<f64>,
    pub cutoff_used: Option<usize>,
    pub converged: Option<bool>,
    #[serde(default)]
    pub extra: BTreeMap<String, ExtraValue>,
}

impl ExperimentRecord {
    pub fn new(experiment_id: impl Into<String>, sweep_value: f64, level_index: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment_id: experiment_id.into(),
            sweep_value,
            seed: None,
            level_index,
            energy: None,
            shifted_energy: None,
            parity: None,
            doublet_expectation: None,
            cutoff_used: None,
            converged: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: ExtraValue) -> Self {
        self.extra.insert(key.to_owned(), value);
        self
    }
}

/// How a sweep chooses its Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffPolicy {
    /// Doubling from `start` until the tracked levels move by less than `tol · ω`.
    Converge { start: usize, tol: f64, max_cutoff: usize },
    /// Closed-form cutoff for levels up to `energy_max` above `-λ²` (see
    /// [`window_cutoff`]).
    Window { energy_max: f64 },
    Fixed(usize),
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::Converge { start: 16, tol: 1e-8, max_cutoff: DEFAULT_MAX_CUTOFF }
    }
}

impl CutoffPolicy {
    /// Cutoff for `spec` tracking `n_levels` levels, with the convergence
    /// flag and residual (`0` when the policy does not test convergence).
    pub fn resolve(&self, spec: &ModelSpec, lambda: f64, n_levels: usize) -> Result<(usize, bool, f64)> {
        match *self {
            CutoffPolicy::Converge { start, tol, max_cutoff } => {
                let opts = ConvergenceOptions { n_levels, tol, max_cutoff, ..Default::default() };
                let r = converge_levels(&spec.with_cutoff(start.max(1)), &opts)?;
                Ok((r.cutoff_used, r.converged, r.residual))
            }
            CutoffPolicy::Window { energy_max } => Ok((window_cutoff(energy_max, lambda), true, 0.0)),
            CutoffPolicy::Fixed(c) => Ok((c.max(1), true, 0.0)),
        }
    }
}

/// `⌈E + 2λ² + 5λ⌉ + 14`: enough photons that every level with shifted
/// energy below `E` is converged to `10⁻⁸ ω` for `λ ≤ 3` (measured on
/// random `5 × 5` couplings, which need `⌈E + 2λ² + 5λ⌉ + 9` at most).
pub fn window_cutoff(energy_max: f64, lambda: f64) -> usize {
    let l = lambda.abs();
    (energy_max.max(0.0) + 2.0 * l * l + 5.0 * l).ceil() as usize + 14
}

/// `k` points equally spaced on `[-1, 1]`, endpoints included.
pub fn equally_spaced_detunings(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..k).map(|i| -1.0 + 2.0 * i as f64 / (k - 1) as f64).collect(),
    }
}

/// `[start, stop]` in `steps` equal intervals.
pub fn linear_grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![start];
    }
    (0..=steps).map(|i| start + (stop - start) * i as f64 / steps as f64).collect()
}

pub(crate) fn real_matrix(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
    Mat::from_fn(rows, cols, |i, j| C64::new(f(i, j), 0.0))
}

pub(crate) fn parity_labels(basis: &FockBasis) -> Vec<i64> {
    (0..basis.dim()).map(|i| i64::from(basis.parity(i))).collect()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, iterations: usize) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..iterations {
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}
