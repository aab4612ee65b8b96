//! Monte Carlo checks of the largest-singular-value law.

use serde::{Deserialize, Serialize};

use super::{ExperimentRecord, ExtraValue};
use crate::error::{Error, Result};
use crate::rmt::{
    ks_distance, min_kappa1, moment_lambda1_principal, pdf_lambda1, sample_largest_singular_values, variance_lambda1,
    Ensemble, SvDistribution,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixOptions {
    pub n_grid: Vec<usize>,
    pub trials_mean: usize,
    pub trials_hist: usize,
    /// Sizes for which a histogram with the model density is produced.
    pub hist_n: Vec<usize>,
    pub hist_bins: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl Default for AppendixOptions {
    fn default() -> Self {
        Self {
            n_grid: (2..=50).collect(),
            trials_mean: 1000,
            trials_hist: 600,
            hist_n: vec![2, 5, 10, 50],
            hist_bins: 40,
            ensemble: Ensemble::Complex,
            seed: 0,
        }
    }
}

/// Analytic and sampled moments of `λ₁` for square `n × n` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvMomentRow {
    pub n: usize,
    /// Real part of the closed-form mean.
    pub analytic_mean: f64,
    /// Imaginary part left by the principal-branch continuation (zero when
    /// `μ/ρ > α`).
    pub analytic_mean_imag: f64,
    pub analytic_variance: f64,
    pub min_kappa1: f64,
    pub mc_mean: f64,
    pub mc_variance: f64,
    pub mc_stderr: f64,
}

impl SvMomentRow {
    /// `|analytic - sampled| / standard error`.
    pub fn mean_z_score(&self) -> f64 {
        (self.analytic_mean - self.mc_mean).abs() / self.mc_stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvHistogram {
    pub n: usize,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Model density at the bin centres.
    pub pdf: Vec<f64>,
    pub ks: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixOutput {
    pub ensemble: Ensemble,
    pub seed: u64,
    pub moments: Vec<SvMomentRow>,
    pub histograms: Vec<SvHistogram>,
}

impl AppendixOutput {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut out = Vec::new();
        for row in &self.moments {
            let mut r = ExperimentRecord::new("appendix-sv.moments", row.n as f64, 0)
                .with_extra("ensemble", ExtraValue::Text(self.ensemble.name().into()))
                .with_extra("analytic_mean", ExtraValue::Real(row.analytic_mean))
                .with_extra("analytic_mean_imag", ExtraValue::Real(row.analytic_mean_imag))
                .with_extra("analytic_variance", ExtraValue::Real(row.analytic_variance))
                .with_extra("min_kappa1", ExtraValue::Real(row.min_kappa1))
                .with_extra("mc_mean", ExtraValue::Real(row.mc_mean))
                .with_extra("mc_variance", ExtraValue::Real(row.mc_variance))
                .with_extra("mc_stderr", ExtraValue::Real(row.mc_stderr));
            r.seed = Some(self.seed);
            out.push(r);
        }
        for h in &self.histograms {
            let mut r = ExperimentRecord::new("appendix-sv.histogram", h.n as f64, 0)
                .with_extra("ensemble", ExtraValue::Text(self.ensemble.name().into()))
                .with_extra("edges", ExtraValue::Reals(h.edges.clone()))
                .with_extra("counts", ExtraValue::Ints(h.counts.iter().map(|&c| c as i64).collect()))
                .with_extra("pdf", ExtraValue::Reals(h.pdf.clone()))
                .with_extra("ks", ExtraValue::Real(h.ks));
            r.seed = Some(self.seed);
            out.push(r);
        }
        out
    }
}

fn histogram(dist: &SvDistribution, samples: &[f64], bins: usize) -> Result<SvHistogram> {
    let top = samples.iter().copied().fold(0.0, f64::max) * 1.25;
    let edges = super::linear_grid(0.0, top, bins);
    let mut counts = vec![0u64; bins];
    for &y in samples {
        let b = ((y / top) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let pdf = edges.windows(2).map(|w| pdf_lambda1(dist, 0.5 * (w[0] + w[1]))).collect::<Result<_>>()?;
    Ok(SvHistogram { n: dist.n, edges, counts, pdf, ks: ks_distance(dist, samples)? })
}

/// Closed-form mean and variance of `λ₁` against Monte Carlo for each `n` in
/// `n_grid`, plus histograms with the model density for `hist_n`. The first
/// `trials_mean` samples feed the moments and the first `trials_hist` the
/// histograms; both come from the same seeded streams.
pub fn run_appendix_sv_stats(opts: &AppendixOptions) -> Result<AppendixOutput> {
    if opts.n_grid.iter().chain(&opts.hist_n).any(|&n| n < 2) {
        return Err(Error::Domain("matrix sizes must be ≥ 2".into()));
    }
    if opts.trials_mean < 2 || opts.trials_hist < 1 || opts.hist_bins == 0 {
        return Err(Error::Domain("need ≥ 2 mean trials, ≥ 1 histogram trial and ≥ 1 bin".into()));
    }
    let mut sizes: Vec<usize> = opts.n_grid.iter().chain(&opts.hist_n).copied().collect();
    sizes.sort_unstable();
    sizes.dedup();
    let trials = opts.trials_mean.max(opts.trials_hist);

    let mut moments = Vec::new();
    let mut histograms = Vec::new();
    for n in sizes {
        let samples = sample_largest_singular_values(n, n, opts.ensemble, trials, opts.seed)?;
        let dist = SvDistribution::new(opts.ensemble, n, n)?;
        if opts.n_grid.contains(&n) {
            let used = &samples[..opts.trials_mean];
            let count = used.len() as f64;
            let mc_mean = used.iter().sum::<f64>() / count;
            let mc_variance = used.iter().map(|y| (y - mc_mean).powi(2)).sum::<f64>() / (count - 1.0);
            let mean = moment_lambda1_principal(&dist, 1)?;
            moments.push(SvMomentRow {
                n,
                analytic_mean: mean.re,
                analytic_mean_imag: mean.im,
                analytic_variance: variance_lambda1(&dist)?,
                min_kappa1: min_kappa1(&dist),
                mc_mean,
                mc_variance,
                mc_stderr: (mc_variance / count).sqrt(),
            });
        }
        if opts.hist_n.contains(&n) {
            histograms.push(histogram(&dist, &samples[..opts.trials_hist], opts.hist_bins)?);
        }
    }
    Ok(AppendixOutput { ensemble: opts.ensemble, seed: opts.seed, moments, histograms })
}
