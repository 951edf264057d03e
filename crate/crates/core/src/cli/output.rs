//! Manifest header and CSV/JSON writers.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use super::params::Format;
use crate::error::Result;

/// Everything needed to re-run an experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentManifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

impl ExperimentManifest {
    pub fn new(subcommand: &str, params: Value, seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("# addwalk {}", self.version),
            format!("# subcommand: {}", self.subcommand),
            format!("# seed: {}", self.seed),
            format!("# params: {}", self.params),
            format!("# timestamp: {}", self.timestamp),
        ]
    }
}

/// A command's result, in both table and structured form.
#[derive(Clone, Debug)]
pub struct Output {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `#` lines written after the manifest in CSV mode.
    pub notes: Vec<String>,
    pub json: Value,
    /// An inequality or identity check failed.
    pub violation: bool,
}

impl Output {
    pub fn table(columns: Vec<&'static str>, rows: Vec<Vec<String>>, json: Value) -> Self {
        Self { columns, rows, notes: Vec::new(), json, violation: false }
    }
}

/// Shortest round-trip decimal, so equal values always print equal bytes.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_output(w: &mut dyn Write, manifest: &ExperimentManifest, out: &Output, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            for line in manifest.header_lines() {
                writeln!(w, "{line}")?;
            }
            for note in &out.notes {
                writeln!(w, "# {note}")?;
            }
            writeln!(w, "{}", out.columns.join(","))?;
            for row in &out.rows {
                writeln!(w, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({ "manifest": manifest, "result": out.json });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
