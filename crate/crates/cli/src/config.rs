//! Turns flags and an optional TOML file into a validated [`RunConfig`].
//!
//! Precedence is flag, then file, then built-in default. The resolved
//! settings are kept as a [`FileConfig`] so a run can be written back out
//! with [`RunConfig::to_toml`] and replayed exactly.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use multilevel_rabi::experiments::{
    equally_spaced_detunings, AppendixOptions, CutoffPolicy, Fig1Options, Fig3Options, Fig4Options, Fig5Options,
};
use multilevel_rabi::rmt::Ensemble;
use multilevel_rabi::{DoubletLabels, ModelSpec};
use thiserror::Error;

use crate::args::*;
use crate::coupling::{parse_coupling, parse_grid, parse_size_grid};

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Flag grammar violation; the message is clap's rendered report.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config file {path}: {message}")]
    File { path: PathBuf, message: String },
}

impl From<multilevel_rabi::Error> for ConfigError {
    fn from(e: multilevel_rabi::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// Fully resolved work item for [`crate::execute`].
#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Spectrum { model: ModelSpec, sweep: Vec<f64>, levels: usize, doublet: DoubletLabels, tol: f64, max_cutoff: usize },
    Svd { model: ModelSpec },
    Radiation { model: ModelSpec },
    RmtStats { ensemble: Ensemble, n: usize, m: usize, pdf_grid: Vec<f64> },
    Fig1(Fig1Options),
    Fig3(Fig3Options),
    Fig4(Fig4Options),
    Fig5(Fig5Options),
    AppendixSv(AppendixOptions),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandName,
    pub job: Job,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Tolerance overrides in effect (`tol`, `max-cutoff`, ...).
    pub tolerances: BTreeMap<String, f64>,
    /// Every setting after merging, in config-file layout.
    pub resolved: FileConfig,
}

impl RunConfig {
    /// Config file reproducing this run when passed back via `--config`.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.resolved).expect("config tables serialize")
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_CUTOFF: usize = 1024;
const DEFAULT_START_CUTOFF: usize = 16;
const DEFAULT_LEVELS: usize = 12;

/// Parses `argv` (program name first). `file` is TOML text that takes the
/// place of `--config`; when it is `None` the `--config` path, if any, is read.
pub fn parse_config<I, T>(argv: I, file: Option<&str>) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| ConfigError::Usage(e.render().to_string()))?;
    let (command, flags) = FileConfig::from_command(cli.command);

    let config_path = flags.run.as_ref().and_then(|r| r.config.clone());
    let from_file = match (file, &config_path) {
        (Some(text), _) => Some(parse_file(text, Path::new("<inline>"))?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
            Some(parse_file(&text, path)?)
        }
        (None, None) => None,
    };
    let merged = match from_file {
        Some(f) => {
            if let Some(c) = f.command {
                if c != command {
                    return Err(ConfigError::Invalid(format!(
                        "config file is for command '{}' but '{}' was invoked",
                        c.name(),
                        command.name()
                    )));
                }
            }
            flags.merge(f)
        }
        None => flags,
    };
    resolve(command, merged)
}

fn parse_file(text: &str, path: &Path) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::File { path: path.to_owned(), message: e.message().to_owned() })
}

impl FileConfig {
    fn from_command(args: CommandArgs) -> (CommandName, FileConfig) {
        let mut f = FileConfig::default();
        let (name, common) = match args {
            CommandArgs::Spectrum { model, spectrum, common } => {
                f.model = Some(model);
                f.spectrum = Some(spectrum);
                (CommandName::Spectrum, common)
            }
            CommandArgs::Svd { model, common } => {
                f.model = Some(model);
                (CommandName::Svd, common)
            }
            CommandArgs::Radiation { model, common } => {
                f.model = Some(model);
                (CommandName::Radiation, common)
            }
            CommandArgs::RmtStats { rmt, common } => {
                f.rmt_stats = Some(rmt);
                (CommandName::RmtStats, common)
            }
            CommandArgs::Fig1 { fig1, common } => {
                f.fig1 = Some(fig1);
                (CommandName::Fig1, common)
            }
            CommandArgs::Fig3 { fig3, common } => {
                f.fig3 = Some(fig3);
                (CommandName::Fig3, common)
            }
            CommandArgs::Fig4 { fig4, common } => {
                f.fig4 = Some(fig4);
                (CommandName::Fig4, common)
            }
            CommandArgs::Fig5 { fig5, common } => {
                f.fig5 = Some(fig5);
                (CommandName::Fig5, common)
            }
            CommandArgs::AppendixSv { appendix, common } => {
                f.appendix_sv = Some(appendix);
                (CommandName::AppendixSv, common)
            }
        };
        f.run = Some(common);
        (name, f)
    }

    fn merge(self, fallback: FileConfig) -> FileConfig {
        fn m<T: Merge + Default>(a: Option<T>, b: Option<T>) -> Option<T> {
            match (a, b) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or_default().merge(b.unwrap_or_default())),
            }
        }
        FileConfig {
            command: self.command.or(fallback.command),
            run: m(self.run, fallback.run),
            model: m(self.model, fallback.model),
            spectrum: m(self.spectrum, fallback.spectrum),
            rmt_stats: m(self.rmt_stats, fallback.rmt_stats),
            fig1: m(self.fig1, fallback.fig1),
            fig3: m(self.fig3, fallback.fig3),
            fig4: m(self.fig4, fallback.fig4),
            fig5: m(self.fig5, fallback.fig5),
            appendix_sv: m(self.appendix_sv, fallback.appendix_sv),
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn positive(name: &str, v: usize) -> Result<usize, ConfigError> {
    if v == 0 {
        return Err(invalid(format!("--{name} must be ≥ 1")));
    }
    Ok(v)
}

fn finite_positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("--{name} must be a positive number, got {v}")));
    }
    Ok(v)
}

fn ensemble(text: Option<&str>) -> Result<Ensemble, ConfigError> {
    text.map_or(Ok(Ensemble::Complex), |s| s.parse::<Ensemble>().map_err(ConfigError::from))
}

fn build_model(a: &ModelArgs, default_cutoff: usize) -> Result<ModelSpec, ConfigError> {
    let coupling = a.coupling.as_deref().map(|c| parse_coupling(c, a.n, a.m)).transpose()?;
    let (n, m) = match (&coupling, a.n, a.m) {
        (Some(c), _, _) => (c.nrows(), c.ncols()),
        (None, Some(n), Some(m)) => (n, m),
        (None, n, m) => match (n.or(m), a.delta_e.as_ref(), a.delta_g.as_ref()) {
            (_, Some(e), Some(g)) => (n.unwrap_or(e.len()), m.unwrap_or(g.len())),
            (Some(k), _, _) => (n.unwrap_or(k), m.unwrap_or(k)),
            _ => return Err(invalid("model needs --coupling, or --n and --m")),
        },
    };
    let epsilon = a.epsilon.unwrap_or(0.0);
    // without explicit detunings a nonzero ε spreads each manifold over [-1, 1]
    let delta_e = a.delta_e.clone().unwrap_or_else(|| equally_spaced_detunings(n));
    let delta_g = a.delta_g.clone().unwrap_or_else(|| equally_spaced_detunings(m));
    let mut b = ModelSpec::builder(n, m)
        .omega(a.omega.unwrap_or(1.0))
        .epsilon(epsilon)
        .delta_e(delta_e)
        .delta_g(delta_g)
        .fock_cutoff(a.cutoff.unwrap_or(default_cutoff));
    if let Some(c) = coupling {
        b = b.coupling(c);
    }
    Ok(b.build()?)
}

fn resolve(command: CommandName, mut cfg: FileConfig) -> Result<RunConfig, ConfigError> {
    cfg.command = Some(command);
    let run = cfg.run.clone().unwrap_or_default();
    if command.is_stochastic() && run.seed.is_none() {
        return Err(invalid(format!(
            "'{}' is stochastic and needs an explicit seed: pass --seed S or set seed in the [run] table",
            command.name()
        )));
    }
    if run.threads == Some(0) {
        return Err(invalid("--threads must be ≥ 1"));
    }
    let tol = finite_positive("tol", run.tol.unwrap_or(DEFAULT_TOL))?;
    let max_cutoff = positive("max-cutoff", run.max_cutoff.unwrap_or(DEFAULT_MAX_CUTOFF))?;
    let seed = run.seed;
    let policy = CutoffPolicy::Converge { start: DEFAULT_START_CUTOFF.min(max_cutoff), tol, max_cutoff };

    let mut tolerances = BTreeMap::new();
    let job = match command {
        CommandName::Spectrum => {
            let a = cfg.model.clone().unwrap_or_default();
            let s = cfg.spectrum.clone().unwrap_or_default();
            let model = build_model(&a, DEFAULT_START_CUTOFF)?;
            let sweep = s.sweep.as_deref().map_or(Ok(vec![1.0]), parse_grid)?;
            let doublet = match s.doublet.unwrap_or(DoubletChoice::None) {
                DoubletChoice::None => DoubletLabels::None,
                DoubletChoice::Bare => DoubletLabels::Bare,
                DoubletChoice::Radiation => DoubletLabels::Radiation,
            };
            if doublet == DoubletLabels::Bare && model.n_excited() != model.n_ground() {
                return Err(invalid("--doublet bare needs n = m; use --doublet radiation"));
            }
            tolerances.insert("tol".into(), tol);
            tolerances.insert("max-cutoff".into(), max_cutoff as f64);
            let levels = positive("levels", s.levels.unwrap_or(DEFAULT_LEVELS))?;
            Job::Spectrum { model, sweep, levels, doublet, tol, max_cutoff }
        }
        CommandName::Svd => Job::Svd { model: build_model(&cfg.model.clone().unwrap_or_default(), 1)? },
        CommandName::Radiation => Job::Radiation { model: build_model(&cfg.model.clone().unwrap_or_default(), 1)? },
        CommandName::RmtStats => {
            let r = cfg.rmt_stats.clone().unwrap_or_default();
            let n = positive("n", r.n.or(r.m).ok_or_else(|| invalid("rmt-stats needs --n (and optionally --m)"))?)?;
            let m = positive("m", r.m.unwrap_or(n))?;
            let top = 1.5 * ((n as f64).sqrt() + (m as f64).sqrt()) + 2.0;
            let pdf_grid = r.pdf_grid.as_deref().map_or_else(|| Ok(multilevel_rabi::experiments::linear_grid(0.0, top, 200)), parse_grid)?;
            Job::RmtStats { ensemble: ensemble(r.ensemble.as_deref())?, n, m, pdf_grid }
        }
        CommandName::Fig1 => {
            let a = cfg.fig1.clone().unwrap_or_default();
            let mut o = Fig1Options { cutoff_policy: policy, ..Default::default() };
            if let Some(g) = &a.grid {
                o.lambda_grid = parse_grid(g)?;
            }
            o.ratio = a.ratio.unwrap_or(o.ratio);
            o.levels = positive("levels", a.levels.unwrap_or(o.levels))?;
            tolerances.insert("tol".into(), tol);
            tolerances.insert("max-cutoff".into(), max_cutoff as f64);
            Job::Fig1(o)
        }
        CommandName::Fig3 => {
            let a = cfg.fig3.clone().unwrap_or_default();
            let mut o = Fig3Options { cutoff_policy: policy, ..Default::default() };
            o.epsilon = a.epsilon.unwrap_or(o.epsilon);
            if let Some(d) = &a.deltas {
                let [d1, d2] = d.as_slice() else {
                    return Err(invalid("--deltas takes exactly two values, e.g. --deltas=-1,1"));
                };
                o.deltas = (*d1, *d2);
            }
            o.offdiagonal = a.offdiagonal.unwrap_or(o.offdiagonal);
            if let Some(g) = &a.grid {
                o.lambda_grid = parse_grid(g)?;
            }
            o.levels = positive("levels", a.levels.unwrap_or(o.levels))?;
            o.swap_offset = finite_positive("swap-offset", a.swap_offset.unwrap_or(o.swap_offset))?;
            tolerances.insert("tol".into(), tol);
            tolerances.insert("max-cutoff".into(), max_cutoff as f64);
            Job::Fig3(o)
        }
        CommandName::Fig4 => {
            let a = cfg.fig4.clone().unwrap_or_default();
            let mut o = Fig4Options { seed: seed.unwrap_or_default(), ..Default::default() };
            o.n = positive("n", a.n.unwrap_or(o.n))?;
            o.systems = positive("systems", a.systems.unwrap_or(o.systems))?;
            o.lambda_max = finite_positive("lambda-max", a.lambda_max.unwrap_or(o.lambda_max))?;
            if let Some(b) = &a.bins {
                let [c, e] = b.as_slice() else {
                    return Err(invalid("--bins takes two values: coupling bins,energy bins"));
                };
                o.bins = (positive("bins", *c)?, positive("bins", *e)?);
            }
            o.energy_max = finite_positive("energy-max", a.energy_max.unwrap_or(o.energy_max))?;
            o.epsilon = a.epsilon.unwrap_or(o.epsilon);
            o.validation_tol = finite_positive("validation-tol", a.validation_tol.unwrap_or(o.validation_tol))?;
            tolerances.insert("validation-tol".into(), o.validation_tol);
            Job::Fig4(o)
        }
        CommandName::Fig5 => {
            let a = cfg.fig5.clone().unwrap_or_default();
            let mut o = Fig5Options { seed: seed.unwrap_or_default(), max_cutoff, ..Default::default() };
            if let Some(t) = run.tol {
                o.tol = t;
            }
            o.n = positive("n", a.n.unwrap_or(o.n))?;
            o.systems = positive("systems", a.systems.unwrap_or(o.systems))?;
            o.lambda1 = a.lambda1.unwrap_or(o.lambda1);
            o.epsilon = a.epsilon.unwrap_or(o.epsilon);
            tolerances.insert("tol".into(), o.tol);
            tolerances.insert("max-cutoff".into(), max_cutoff as f64);
            Job::Fig5(o)
        }
        CommandName::AppendixSv => {
            let a = cfg.appendix_sv.clone().unwrap_or_default();
            let mut o = AppendixOptions { seed: seed.unwrap_or_default(), ..Default::default() };
            if let Some(g) = &a.n_grid {
                o.n_grid = parse_size_grid(g)?;
            }
            o.trials_mean = positive("trials-mean", a.trials_mean.unwrap_or(o.trials_mean))?;
            o.trials_hist = positive("trials-hist", a.trials_hist.unwrap_or(o.trials_hist))?;
            o.hist_n = a.hist_n.clone().unwrap_or(o.hist_n);
            o.hist_bins = positive("hist-bins", a.hist_bins.unwrap_or(o.hist_bins))?;
            o.ensemble = ensemble(a.ensemble.as_deref())?;
            Job::AppendixSv(o)
        }
    };

    if let Some(run) = cfg.run.as_mut() {
        run.config = None;
    }
    Ok(RunConfig {
        command,
        job,
        output_path: run.out.clone(),
        output_format: run.format.unwrap_or_default(),
        seed,
        threads: run.threads,
        tolerances,
        resolved: cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, ConfigError> {
        parse_config(std::iter::once("mlrabi").chain(args.split_whitespace()), None)
    }

    #[test]
    fn spectrum_defaults() {
        let c = parse("spectrum --coupling diag:1,0.5").unwrap();
        let Job::Spectrum { model, sweep, levels, tol, .. } = c.job else { panic!() };
        assert_eq!((model.n_excited(), model.n_ground(), model.fock_cutoff()), (2, 2, DEFAULT_START_CUTOFF));
        assert_eq!((sweep, levels, tol), (vec![1.0], DEFAULT_LEVELS, DEFAULT_TOL));
        assert_eq!(c.output_format, OutputFormat::Csv);
        assert!(c.output_path.is_none());
    }

    #[test]
    fn detunings_default_to_equal_spacing() {
        let c = parse("spectrum --n 3 --m 2 --coupling uniform:0.1 --epsilon 0.05").unwrap();
        let Job::Spectrum { model, .. } = c.job else { panic!() };
        assert_eq!(model.delta_e(), &[-1.0, 0.0, 1.0]);
        assert_eq!(model.delta_g(), &[-1.0, 1.0]);
    }

    #[test]
    fn model_errors_are_reported() {
        assert!(matches!(parse("spectrum"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse("spectrum --coupling diag:1 --delta-e 2"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse("spectrum --coupling diag:1 --omega 0"), Err(ConfigError::Invalid(_))));
        assert!(parse("spectrum --n 2 --m 3 --coupling uniform:1 --doublet bare").is_err());
    }

    #[test]
    fn file_command_must_match() {
        let err = parse_config(["mlrabi", "svd", "--coupling", "diag:1"], Some("command = \"fig1\"")).unwrap_err();
        assert!(err.to_string().contains("fig1"));
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let err = parse_config(["mlrabi", "svd", "--coupling", "diag:1"], Some("[model]\ncoupling_typo = 1")).unwrap_err();
        assert!(matches!(err, ConfigError::File { .. }));
    }

    #[test]
    fn fig_options_take_overrides() {
        let c = parse("fig3 --deltas=-0.5,0.5 --grid 0:1:10").unwrap();
        let Job::Fig3(o) = c.job else { panic!() };
        assert_eq!(o.deltas, (-0.5, 0.5));
        assert_eq!(o.lambda_grid.len(), 11);

        let c = parse("appendix-sv --seed 3 --n-grid 2:4 --ensemble real").unwrap();
        let Job::AppendixSv(o) = c.job else { panic!() };
        assert_eq!((o.n_grid, o.ensemble, o.seed), (vec![2, 3, 4], Ensemble::Real, 3));
    }

    #[test]
    fn fig5_tolerance_override() {
        let Job::Fig5(o) = parse("fig5 --seed 1").unwrap().job else { panic!() };
        assert_eq!(o.tol, Fig5Options::default().tol);
        let Job::Fig5(o) = parse("fig5 --seed 1 --tol 1e-9").unwrap().job else { panic!() };
        assert_eq!(o.tol, 1e-9);
    }
}
