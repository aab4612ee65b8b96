//! Spectra of the two-doublet model with diagonal coupling `diag(λ, rλ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{real_matrix, CutoffPolicy, ExperimentRecord};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, ModelSpec};
use crate::spectral::sector_eigen;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Options {
    pub lambda_grid: Vec<f64>,
    /// Coupling of doublet 2 relative to doublet 1.
    pub ratio: f64,
    /// Levels reported per grid point.
    pub levels: usize,
    pub cutoff_policy: CutoffPolicy,
}

impl Default for Fig1Options {
    fn default() -> Self {
        Self {
            lambda_grid: super::linear_grid(0.0, 2.0, 100),
            ratio: 0.7,
            levels: 12,
            cutoff_policy: CutoffPolicy::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Level {
    pub energy: f64,
    /// `energy + λ_d²/ω` with `d` the doublet type of the state.
    pub shifted_energy: f64,
    pub parity: i8,
    /// 1 or 2; exact because the spectrum is resolved by doublet sector.
    pub doublet: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Point {
    pub lambda: f64,
    pub cutoff_used: usize,
    pub converged: bool,
    pub levels: Vec<Fig1Level>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Output {
    pub ratio: f64,
    pub points: Vec<Fig1Point>,
}

impl Fig1Output {
    pub fn unconverged(&self) -> usize {
        self.points.iter().filter(|p| !p.converged).count()
    }

    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut out = Vec::new();
        for p in &self.points {
            for (i, l) in p.levels.iter().enumerate() {
                let mut r = ExperimentRecord::new("fig1", p.lambda, i);
                r.energy = Some(l.energy);
                r.shifted_energy = Some(l.shifted_energy);
                r.parity = Some(l.parity);
                r.doublet_expectation = Some(f64::from(l.doublet));
                r.cutoff_used = Some(p.cutoff_used);
                r.converged = Some(p.converged);
                out.push(r);
            }
        }
        out
    }
}

fn point(lambda: f64, opts: &Fig1Options) -> Result<Fig1Point> {
    let couplings = [lambda, opts.ratio * lambda];
    let spec = ModelSpec::builder(2, 2)
        .coupling(real_matrix(2, 2, |i, j| if i == j { couplings[i] } else { 0.0 }))
        .build()?;
    let (cutoff, converged, _) = opts.cutoff_policy.resolve(&spec, lambda, opts.levels)?;
    let spec = spec.with_cutoff(cutoff);
    let h = build_hamiltonian(&spec);
    // sector label = 2·type + (parity is even)
    let labels: Vec<i64> = (0..h.dim())
        .map(|i| {
            let s = h.basis.state(i);
            2 * (s.level.index() as i64 + 1) + i64::from(h.basis.parity(i) > 0)
        })
        .collect();
    let sectors = sector_eigen(&h.matrix, &labels, false)?;
    let omega = spec.omega();
    let levels = sectors
        .values
        .iter()
        .zip(&sectors.labels)
        .take(opts.levels)
        .map(|(&energy, &label)| {
            let doublet = (label / 2) as u8;
            let lam = couplings[usize::from(doublet) - 1];
            Fig1Level {
                energy,
                shifted_energy: energy + lam * lam / omega,
                parity: if label % 2 == 1 { 1 } else { -1 },
                doublet,
            }
        })
        .collect();
    Ok(Fig1Point { lambda, cutoff_used: cutoff, converged, levels })
}

/// Lowest `levels` eigenvalues of the `n = m = 2` model with
/// `Λ = diag(λ, ratio·λ)` and `ε = 0` over `lambda_grid`, each labelled by
/// parity and doublet type and shifted by its own `λ_d²/ω`.
pub fn run_fig1_diagonal_spectra(opts: &Fig1Options) -> Result<Fig1Output> {
    if let Some(l) = opts.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Domain(format!("coupling grid values must be ≥ 0, got {l}")));
    }
    if !(opts.ratio.is_finite() && opts.ratio >= 0.0) {
        return Err(Error::Domain(format!("ratio must be ≥ 0, got {}", opts.ratio)));
    }
    if opts.levels == 0 {
        return Err(Error::Domain("levels must be ≥ 1".into()));
    }
    let points = opts
        .lambda_grid
        .par_iter()
        .map(|&l| point(l, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig1Output { ratio: opts.ratio, points })
}
