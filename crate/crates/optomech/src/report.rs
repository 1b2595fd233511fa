//! Output artifacts: deterministic CSV tables, JSON run manifests, and
//! printable feature summaries of entanglement traces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::entanglement::TraceFeatures;
use crate::error::Error;
use crate::model::{DriveProfile, SystemParams};

/// One CSV cell. Floats render with 17 significant digits so that a rerun
/// with the same configuration reproduces the files byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvValue {
    /// Floating-point cell, rendered as `{:.16e}`.
    Float(f64),
    /// Integer cell.
    Int(i64),
    /// Boolean cell, rendered as `true`/`false`.
    Bool(bool),
    /// Verbatim text cell (must not contain commas or newlines).
    Text(String),
}

impl From<f64> for CsvValue {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<usize> for CsvValue {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<bool> for CsvValue {
    fn from(x: bool) -> Self {
        Self::Bool(x)
    }
}

impl From<&str> for CsvValue {
    fn from(x: &str) -> Self {
        Self::Text(x.to_owned())
    }
}

impl std::fmt::Display for CsvValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Float(x) => write!(f, "{x:.16e}"),
            Self::Int(x) => write!(f, "{x}"),
            Self::Bool(x) => write!(f, "{x}"),
            Self::Text(x) => write!(f, "{x}"),
        }
    }
}

/// In-memory CSV table with a fixed header row.
#[derive(Debug, Clone)]
pub struct CsvTable {
    /// Column names, written as the header row.
    pub columns: Vec<String>,
    /// Data rows; every row has exactly `columns.len()` cells.
    pub rows: Vec<Vec<CsvValue>>,
}

impl CsvTable {
    /// Empty table with the given header.
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row; its arity must match the header.
    pub fn push_row(&mut self, row: Vec<CsvValue>) {
        assert_eq!(row.len(), self.columns.len(), "CSV row arity mismatch");
        self.rows.push(row);
    }

    /// Render the table, header first, one line per row.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{cell}");
            }
            out.push('\n');
        }
        out
    }

    /// Write the table to `dir/name` and return the full path.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, Error> {
        let path = dir.join(name);
        std::fs::write(&path, self.render())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(path)
    }
}

/// Resolved inputs of one curve, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRecord {
    /// Curve label as used in file names and summaries.
    pub label: String,
    /// Evolution mode the curve ran in.
    pub mode: String,
    /// Fully resolved physical parameters (sweep placeholders resolved at
    /// the first sweep point for swept axes).
    pub params: SystemParams,
    /// Fully resolved drive profile.
    pub drive: DriveProfile,
}

/// Convergence diagnostic of one curve, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    /// Curve label.
    pub label: String,
    /// Worst relative change seen in the grid-halving check, when run.
    pub worst_rel_change: Option<f64>,
    /// Tolerance the check was held to.
    pub tol: f64,
}

/// Everything needed to reproduce a run: tool version, the full resolved
/// configuration, per-curve parameters, grid sizes, convergence
/// diagnostics, and the list of files written.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    /// Version of this crate.
    pub tool_version: String,
    /// The complete configuration, with every default resolved.
    pub config: RunConfig,
    /// Resolved per-curve inputs.
    pub curves: Vec<CurveRecord>,
    /// Sweep-axis values (empty without a sweep).
    pub sweep_values: Vec<f64>,
    /// Convergence diagnostics per curve.
    pub convergence: Vec<ConvergenceRecord>,
    /// File names written next to this manifest.
    pub outputs: Vec<String>,
}

impl Manifest {
    /// Fresh manifest for a configuration.
    pub fn new(config: &RunConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            curves: Vec::new(),
            sweep_values: config.sweep_values(),
            convergence: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Write `manifest.json` into `dir` and return the full path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, Error> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io { context: "serializing manifest".into(), message: e.to_string() })?;
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(path)
    }
}

/// One-line feature summary of a trace: steady value with plateau drift,
/// maximum, and any death/revival events.
pub fn summarize_trace(label: &str, features: &TraceFeatures) -> String {
    let mut line = format!(
        "{label}: steady {:.4e} (plateau drift {:.2e}), max {:.4e} at κt = {:.3}",
        features.steady_value, features.plateau_drift, features.max_value, features.max_time
    );
    match features.death_time {
        Some(death) => {
            let _ = write!(line, ", dies at κt = {death:.3}");
            let revivals: Vec<String> = features
                .dead_intervals
                .iter()
                .filter_map(|i| i.revival)
                .map(|r| format!("{r:.3}"))
                .collect();
            if !revivals.is_empty() {
                let _ = write!(line, ", revives at κt = [{}]", revivals.join(", "));
            }
        }
        None => line.push_str(", no sudden death"),
    }
    line
}
