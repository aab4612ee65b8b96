//! Record serialization and atomic file output.

use std::io::Write;
use std::path::Path;

use multilevel_rabi::experiments::ExperimentRecord;

use crate::args::OutputFormat;

pub const SPECTRUM_HEADER: [&str; 8] =
    ["sweep_value", "level_index", "energy", "shifted_energy", "parity", "doublet_expectation", "cutoff_used", "converged"];

pub const RECORD_HEADER: [&str; 11] = [
    "experiment_id",
    "sweep_value",
    "level_index",
    "energy",
    "shifted_energy",
    "parity",
    "doublet_expectation",
    "cutoff_used",
    "converged",
    "seed",
    "extra",
];

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map_or_else(String::new, f)
}

fn spectrum_row(r: &ExperimentRecord) -> Vec<String> {
    vec![
        format_float(r.sweep_value),
        r.level_index.to_string(),
        opt(r.energy, format_float),
        opt(r.shifted_energy, format_float),
        opt(r.parity, |p| p.to_string()),
        opt(r.doublet_expectation, format_float),
        opt(r.cutoff_used, |c| c.to_string()),
        opt(r.converged, |c| c.to_string()),
    ]
}

fn record_row(r: &ExperimentRecord) -> Vec<String> {
    let mut row = vec![r.experiment_id.clone()];
    let mut rest = spectrum_row(r);
    rest.push(opt(r.seed, |s| s.to_string()));
    rest.push(if r.extra.is_empty() { String::new() } else { serde_json::to_string(&r.extra).expect("extra serializes") });
    row.append(&mut rest);
    row
}

/// Serializes records. Spectrum output uses the narrower spectrum header;
/// everything else carries the experiment id, seed and `extra` payload.
pub fn render(records: &[ExperimentRecord], format: OutputFormat, spectrum_layout: bool) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(records).expect("records serialize");
            out.push(b'\n');
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if spectrum_layout {
                w.write_record(SPECTRUM_HEADER).expect("in-memory write");
                for r in records {
                    w.write_record(spectrum_row(r)).expect("in-memory write");
                }
            } else {
                w.write_record(RECORD_HEADER).expect("in-memory write");
                for r in records {
                    w.write_record(record_row(r)).expect("in-memory write");
                }
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so a failed run never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
