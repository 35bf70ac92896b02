//! Files written by the CLI: JSON documents, CSV tables, disorder
//! realizations and Monte Carlo checkpoints.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use glassorder_core::verify::{CheckResult, CheckRow};
use glassorder_core::{DisorderRealization, Lattice};
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const META_SCHEMA_VERSION: u32 = 1;

/// `meta.json`: enough to rerun a command bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub toolkit: String,
    pub version: String,
    pub prng: String,
    pub seed: u64,
    pub command: String,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            schema_version: META_SCHEMA_VERSION,
            toolkit: "glassorder".into(),
            version: glassorder_core::VERSION.into(),
            prng: glassorder_core::rng::ALGORITHM.into(),
            seed,
            command: command.into(),
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    /// Position in the battery.
    pub entry: usize,
    pub kind: String,
    #[serde(flatten)]
    pub result: CheckResult,
    /// Per-check CSV, relative to the output directory.
    pub table: String,
}

/// `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub n_checks: usize,
    pub n_fail: usize,
    pub results: Vec<ReportEntry>,
}

impl Report {
    pub fn new(seed: u64, results: Vec<ReportEntry>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            version: glassorder_core::VERSION.into(),
            seed,
            n_checks: results.len(),
            n_fail: results.iter().filter(|r| r.result.status.is_fail()).count(),
            results,
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    fs::write(path, s + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Flattened [`CheckRow`] for the per-check CSV.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    check_id: &'a str,
    label: &'a str,
    #[serde(rename = "L")]
    l: usize,
    lambda: Option<f64>,
    lhs: f64,
    rhs: f64,
    slack: f64,
    stderr: Option<f64>,
}

pub fn write_check_csv(path: &Path, r: &CheckResult) -> Result<()> {
    let rows: Vec<CsvRow> = r
        .rows
        .iter()
        .map(|x: &CheckRow| CsvRow {
            check_id: &r.check_id,
            label: &x.label,
            l: x.l,
            lambda: x.lambda,
            lhs: x.lhs,
            rhs: x.rhs,
            slack: x.slack,
            stderr: x.stderr,
        })
        .collect();
    if rows.is_empty() {
        fs::write(path, "check_id,label,L,lambda,lhs,rhs,slack,stderr\n")?;
        return Ok(());
    }
    write_csv(path, &rows)
}

/// Stores a realization as JSON; floats round-trip exactly.
pub fn save_disorder(path: &Path, d: &DisorderRealization) -> Result<()> {
    write_json(path, d)
}

pub fn load_disorder(path: &Path) -> Result<(Lattice, DisorderRealization)> {
    let d: DisorderRealization = read_json(path)?;
    let lat = Lattice::new(d.d, d.l)?;
    d.check(&lat).with_context(|| format!("disorder file {}", path.display()))?;
    Ok((lat, d))
}

/// Writes through a temporary file so an interrupted run never leaves a
/// truncated checkpoint.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))
}
