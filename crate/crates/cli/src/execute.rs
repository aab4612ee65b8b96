//! Runs a [`RunConfig`] and maps outcomes to exit codes.

use multilevel_rabi::experiments::{
    run_appendix_sv_stats, run_fig1_diagonal_spectra, run_fig3_anticrossing, run_fig4_heatmap,
    run_fig5_groundstate_histogram, ExperimentRecord, ExtraValue,
};
use multilevel_rabi::rmt::{cdf_lambda1, min_kappa1, moment_lambda1_principal, pdf_lambda1, variance_lambda1, SvDistribution};
use multilevel_rabi::{converge_spectrum_with, svd, to_radiation_basis, CMatrix, ConvergenceOptions, Error};
use rayon::prelude::*;

use crate::config::{Job, RunConfig};
use crate::output::{render, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EigenNoConvergence | Error::SvdNoConvergence => EXIT_CONVERGENCE,
        Error::Precision(_) => EXIT_PRECISION,
        _ => EXIT_CONFIG,
    }
}

/// Records produced by a job and the number of unconverged items among them.
pub struct JobOutput {
    pub records: Vec<ExperimentRecord>,
    pub warnings: usize,
}

fn split_complex(values: impl Iterator<Item = multilevel_rabi::C64>) -> (Vec<f64>, Vec<f64>) {
    values.map(|z| (z.re, z.im)).unzip()
}

fn matrix_rows(id: &str, m: &CMatrix) -> Vec<ExperimentRecord> {
    (0..m.nrows())
        .map(|i| {
            let (re, im) = split_complex((0..m.ncols()).map(|j| m[(i, j)]));
            ExperimentRecord::new(id, 0.0, i).with_extra("re", ExtraValue::Reals(re)).with_extra("im", ExtraValue::Reals(im))
        })
        .collect()
}

/// Computes the records of `job` without touching the file system.
pub fn run_job(job: &Job) -> Result<JobOutput, Error> {
    let counted = |records: Vec<ExperimentRecord>| {
        let warnings = records.iter().filter(|r| r.converged == Some(false)).count();
        JobOutput { records, warnings }
    };
    Ok(match job {
        Job::Spectrum { model, sweep, levels, doublet, tol, max_cutoff } => {
            let sigma_max = svd(model.coupling())?.singular_values.first().copied().unwrap_or(0.0);
            let opts = ConvergenceOptions { n_levels: *levels, tol: *tol, max_cutoff: *max_cutoff, doublet: *doublet };
            let per_point = sweep
                .par_iter()
                .map(|&s| {
                    let r = converge_spectrum_with(&model.scaled_coupling(s), &opts)?;
                    let shift = (s * sigma_max).powi(2) / model.omega();
                    Ok((0..r.n_tracked)
                        .map(|i| {
                            let mut rec = ExperimentRecord::new("spectrum", s, i);
                            rec.energy = Some(r.eigenvalues[i]);
                            rec.shifted_energy = Some(r.eigenvalues[i] + shift);
                            rec.parity = Some(r.parities[i]);
                            rec.doublet_expectation = r.doublet_expectations.as_ref().map(|d| d[i]);
                            rec.cutoff_used = Some(r.cutoff_used);
                            rec.converged = Some(r.converged);
                            rec
                        })
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>, Error>>()?;
            counted(per_point.into_iter().flatten().collect())
        }
        Job::Svd { model } => {
            let d = svd(model.coupling())?;
            let (n, m) = (model.n_excited(), model.n_ground());
            let records = (0..n.max(m))
                .map(|k| {
                    let mut rec = ExperimentRecord::new("svd", 0.0, k);
                    if let Some(s) = d.singular_values.get(k) {
                        rec = rec.with_extra("singular_value", ExtraValue::Real(*s));
                    }
                    if k < m {
                        let (re, im) = split_complex(d.u.row(k).iter().copied());
                        rec = rec.with_extra("ground_re", ExtraValue::Reals(re)).with_extra("ground_im", ExtraValue::Reals(im));
                    }
                    if k < n {
                        let (re, im) = split_complex(d.v.row(k).iter().copied());
                        rec = rec.with_extra("excited_re", ExtraValue::Reals(re)).with_extra("excited_im", ExtraValue::Reals(im));
                    }
                    rec
                })
                .collect();
            counted(records)
        }
        Job::Radiation { model } => {
            let d = to_radiation_basis(model)?;
            let mut records: Vec<ExperimentRecord> = d
                .effective_couplings
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    ExperimentRecord::new("radiation.coupling", 0.0, k)
                        .with_extra("coupling", ExtraValue::Real(*c))
                        .with_extra("type", ExtraValue::Int(d.type_index(k).unwrap_or(0) as i64))
                })
                .collect();
            records.push(
                ExperimentRecord::new("radiation.dark", 0.0, 0)
                    .with_extra("excited", ExtraValue::Int(d.dark_excited_count as i64))
                    .with_extra("ground", ExtraValue::Int(d.dark_ground_count as i64)),
            );
            records.extend(matrix_rows("radiation.detuning-excited", &d.detuning_excited_block));
            records.extend(matrix_rows("radiation.detuning-ground", &d.detuning_ground_block));
            counted(records)
        }
        Job::RmtStats { ensemble, n, m, pdf_grid } => {
            let dist = SvDistribution::new(*ensemble, *n, *m)?;
            let mean = moment_lambda1_principal(&dist, 1)?;
            let summary = ExperimentRecord::new("rmt-stats.summary", *n as f64, 0)
                .with_extra("ensemble", ExtraValue::Text(ensemble.name().into()))
                .with_extra("n", ExtraValue::Int(*n as i64))
                .with_extra("m", ExtraValue::Int(*m as i64))
                .with_extra("mu", ExtraValue::Real(dist.mu))
                .with_extra("rho", ExtraValue::Real(dist.rho))
                .with_extra("mean", ExtraValue::Real(mean.re))
                .with_extra("mean_imag", ExtraValue::Real(mean.im))
                .with_extra("variance", ExtraValue::Real(variance_lambda1(&dist)?))
                .with_extra("min_kappa1", ExtraValue::Real(min_kappa1(&dist)))
                .with_extra("mode", ExtraValue::Real(dist.mode_lambda1()));
            let mut records = vec![summary];
            for (i, &y) in pdf_grid.iter().enumerate() {
                records.push(
                    ExperimentRecord::new("rmt-stats.pdf", y, i)
                        .with_extra("pdf", ExtraValue::Real(pdf_lambda1(&dist, y)?))
                        .with_extra("cdf", ExtraValue::Real(cdf_lambda1(&dist, y)?)),
                );
            }
            counted(records)
        }
        Job::Fig1(o) => counted(run_fig1_diagonal_spectra(o)?.records()),
        Job::Fig3(o) => counted(run_fig3_anticrossing(o)?.records()),
        Job::Fig4(o) => {
            let out = run_fig4_heatmap(o)?;
            JobOutput { warnings: out.excluded.len(), records: out.records() }
        }
        Job::Fig5(o) => {
            let out = run_fig5_groundstate_histogram(o)?;
            JobOutput { warnings: out.unconverged(), records: out.records() }
        }
        Job::AppendixSv(o) => counted(run_appendix_sv_stats(o)?.records()),
    })
}

/// Runs `config`, writes its output and prints a one-line summary to
/// standard error. Returns the process exit code.
pub fn execute(config: &RunConfig) -> i32 {
    let run = || -> Result<JobOutput, Error> {
        match config.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start {t} worker threads: {e}")))?
                .install(|| run_job(&config.job)),
            None => run_job(&config.job),
        }
    };
    let out = match run() {
        Ok(out) => out,
        Err(e) => {
            eprintln!("mlrabi {}: error: {e}", config.command.name());
            return exit_code(&e);
        }
    };

    let spectrum_layout = matches!(config.job, Job::Spectrum { .. });
    let bytes = render(&out.records, config.output_format, spectrum_layout);
    let written = match &config.output_path {
        Some(path) => write_atomic(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).and_then(|_| stdout.flush()).map_err(|e| format!("cannot write output: {e}"))
        }
    };
    if let Err(msg) = written {
        eprintln!("mlrabi {}: error: {msg}", config.command.name());
        return EXIT_IO;
    }

    let target = config.output_path.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
    eprintln!(
        "mlrabi {}: {} records written to {target}; {} convergence warnings",
        config.command.name(),
        out.records.len(),
        out.warnings
    );
    if out.warnings > 0 {
        EXIT_CONVERGENCE
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn job(args: &[&str]) -> Job {
        parse_config(std::iter::once("mlrabi").chain(args.iter().copied()), None).unwrap().job
    }

    #[test]
    fn error_codes_are_distinct() {
        assert_eq!(exit_code(&Error::EigenNoConvergence), EXIT_CONVERGENCE);
        assert_eq!(exit_code(&Error::Precision("x".into())), EXIT_PRECISION);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_CONFIG);
    }

    #[test]
    fn radiation_reports_couplings_and_blocks() {
        let out = run_job(&job(&["radiation", "--coupling", "rank1:1,1;1,1,1"])).unwrap();
        let c = &out.records[0];
        assert_eq!(c.experiment_id, "radiation.coupling");
        let Some(ExtraValue::Real(v)) = c.extra.get("coupling") else { panic!() };
        assert!((v - 6f64.sqrt()).abs() < 1e-12);
        let dark = out.records.iter().find(|r| r.experiment_id == "radiation.dark").unwrap();
        assert_eq!(dark.extra["ground"], ExtraValue::Int(1));
        assert_eq!(out.records.iter().filter(|r| r.experiment_id == "radiation.detuning-ground").count(), 3);
    }

    #[test]
    fn rmt_stats_summary_and_pdf() {
        let out = run_job(&job(&["rmt-stats", "--n", "5", "--pdf-grid", "1,3,5"])).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.records[0].extra["m"], ExtraValue::Int(5));
        assert!(out.records[1..].iter().all(|r| r.experiment_id == "rmt-stats.pdf"));
    }
}
