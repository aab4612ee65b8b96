//! Flag grammar. Every section doubles as a table of the TOML config file,
//! so a flag and its config key always share a name.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "mlrabi", version, about = "Multilevel quantum Rabi models: spectra, radiation basis and random-coupling statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Spectrum,
    Svd,
    Radiation,
    RmtStats,
    Fig1,
    Fig3,
    Fig4,
    Fig5,
    AppendixSv,
}

impl CommandName {
    pub fn name(self) -> &'static str {
        match self {
            CommandName::Spectrum => "spectrum",
            CommandName::Svd => "svd",
            CommandName::Radiation => "radiation",
            CommandName::RmtStats => "rmt-stats",
            CommandName::Fig1 => "fig1",
            CommandName::Fig3 => "fig3",
            CommandName::Fig4 => "fig4",
            CommandName::Fig5 => "fig5",
            CommandName::AppendixSv => "appendix-sv",
        }
    }

    /// Commands whose output depends on a random seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, CommandName::Fig4 | CommandName::Fig5 | CommandName::AppendixSv)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DoubletChoice {
    None,
    Bare,
    Radiation,
}

/// Fills unset fields from a lower-priority source.
pub trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! mergeable {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Merge for $t {
            fn merge(self, fallback: Self) -> Self {
                Self { $($f: self.$f.or(fallback.$f)),* }
            }
        }
    };
}

/// Options shared by every command (the `[run]` table).
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CommonArgs {
    /// Worker threads for parallel sweeps (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Convergence tolerance in units of ω.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Ceiling for Fock-cutoff doubling.
    #[arg(long)]
    pub max_cutoff: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML config file; explicit flags take precedence over its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
mergeable!(CommonArgs { threads, tol, max_cutoff, format, out, seed, config });

/// Model description (the `[model]` table).
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelArgs {
    /// Number of excited levels.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of ground levels.
    #[arg(long)]
    pub m: Option<usize>,
    /// diag:a,b,.. | uniform:v | rank1:v1,v2;w1,w2 | full:[[re+imi,..],..] | ginibre:seed[:real]
    #[arg(long, allow_hyphen_values = true)]
    pub coupling: Option<String>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_e: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_g: Option<Vec<f64>>,
    /// Initial Fock cutoff.
    #[arg(long)]
    pub cutoff: Option<usize>,
}
mergeable!(ModelArgs { n, m, coupling, omega, epsilon, delta_e, delta_g, cutoff });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumArgs {
    /// Coupling scale factors: `start:stop:steps` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    /// Levels reported (and tested for convergence) per sweep value.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_enum)]
    pub doublet: Option<DoubletChoice>,
}
mergeable!(SpectrumArgs { sweep, levels, doublet });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RmtArgs {
    /// real | complex
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Points `y` at which the density of λ₁ is tabulated: `start:stop:steps` or a list.
    #[arg(long)]
    pub pdf_grid: Option<String>,
}
mergeable!(RmtArgs { ensemble, n, m, pdf_grid });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Fig1Args {
    /// λ/ω values: `start:stop:steps` or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
}
mergeable!(Fig1Args { grid, ratio, levels });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Fig3Args {
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// δ₁,δ₂ for both manifolds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub deltas: Option<Vec<f64>>,
    /// Off-diagonal element b of the coupling shape [[1, b], [b, 1]].
    #[arg(long)]
    pub offdiagonal: Option<f64>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub swap_offset: Option<f64>,
}
mergeable!(Fig3Args { epsilon, deltas, offdiagonal, grid, levels, swap_offset });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Fig4Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub systems: Option<usize>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Coupling bins,energy bins.
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<usize>>,
    #[arg(long)]
    pub energy_max: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub validation_tol: Option<f64>,
}
mergeable!(Fig4Args { n, systems, lambda_max, bins, energy_max, epsilon, validation_tol });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Fig5Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub systems: Option<usize>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}
mergeable!(Fig5Args { n, systems, lambda1, epsilon });

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AppendixArgs {
    /// Matrix sizes: `lo:hi` inclusive or a comma list.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long)]
    pub trials_mean: Option<usize>,
    #[arg(long)]
    pub trials_hist: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub hist_n: Option<Vec<usize>>,
    #[arg(long)]
    pub hist_bins: Option<usize>,
    #[arg(long)]
    pub ensemble: Option<String>,
}
mergeable!(AppendixArgs { n_grid, trials_mean, trials_hist, hist_n, hist_bins, ensemble });

#[derive(Subcommand, Debug)]
pub enum CommandArgs {
    /// Converged spectrum of one model, optionally swept over a coupling scale.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Singular values and radiation states of the coupling matrix.
    Svd {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Radiation-basis decomposition: effective couplings and detuning blocks.
    Radiation {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Gamma-law statistics of the largest singular value.
    RmtStats {
        #[command(flatten)]
        rmt: RmtArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Two-doublet spectra with diagonal coupling (λ, rλ).
    Fig1 {
        #[command(flatten)]
        fig1: Fig1Args,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Avoided crossings induced by detuning.
    Fig3 {
        #[command(flatten)]
        fig3: Fig3Args,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Energy-density heatmap of random couplings against λ₁.
    Fig4 {
        #[command(flatten)]
        fig4: Fig4Args,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ground-pair histogram of random couplings at fixed λ₁.
    Fig5 {
        #[command(flatten)]
        fig5: Fig5Args,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo comparison of the singular-value law.
    AppendixSv {
        #[command(flatten)]
        appendix: AppendixArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Layout of the TOML config file: an optional `command` key, a `[run]`
/// table with [`CommonArgs`], and one table per command section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub command: Option<CommandName>,
    pub run: Option<CommonArgs>,
    pub model: Option<ModelArgs>,
    pub spectrum: Option<SpectrumArgs>,
    pub rmt_stats: Option<RmtArgs>,
    pub fig1: Option<Fig1Args>,
    pub fig3: Option<Fig3Args>,
    pub fig4: Option<Fig4Args>,
    pub fig5: Option<Fig5Args>,
    pub appendix_sv: Option<AppendixArgs>,
}
