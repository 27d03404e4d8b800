//! Versioned experiment reports and their JSON, CSV and SVG renderings.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::svg::{self, Chart};

pub const SCHEMA: &str = "fpna-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PermuteDemo,
    Pdf,
    MaxvsSweep,
    DeterminismCheck,
    Bench,
    OpSweep,
    GnnDemo,
}

impl ExperimentKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            ExperimentKind::PermuteDemo => "permute_demo",
            ExperimentKind::Pdf => "pdf",
            ExperimentKind::MaxvsSweep => "maxvs_sweep",
            ExperimentKind::DeterminismCheck => "determinism_check",
            ExperimentKind::Bench => "bench",
            ExperimentKind::OpSweep => "op_sweep",
            ExperimentKind::GnnDemo => "gnn_demo",
        }
    }
}

/// One table cell. Floats are written in shortest round-trip form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    UInt(u64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::UInt(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float (or integer) values of one column.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Float(v) => Some(v),
                Cell::UInt(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub artifact: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub family: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            family: std::env::consts::FAMILY.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub kind: ExperimentKind,
    /// Parameters after defaults and command-line overrides.
    pub spec: serde_json::Value,
    /// False when the report contains live-atomic results or timings.
    pub reproducible: bool,
    pub environment: Environment,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub charts: Vec<Chart>,
}

impl Report {
    pub fn new(kind: ExperimentKind, spec: serde_json::Value) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            kind,
            spec,
            reproducible: true,
            environment: Environment::current(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            charts: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("summary values serialize");
        self.summary.insert(key.to_string(), v);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(|v| v.as_f64())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

pub fn table_csv(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::io("<csv buffer>", e.into_error()))
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Writes the requested renderings of `r` into `dir` and returns the paths.
///
/// Files are `<kind>.json`, `<kind>-<table>.csv` and `<kind>-<chart>.svg`.
pub fn emit_report(r: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let stem = r.kind.file_stem();
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        written.push(write(dir.join(format!("{stem}.json")), &r.to_json()?)?);
    }
    if formats.contains(&Format::Csv) {
        for t in &r.tables {
            written.push(write(dir.join(format!("{stem}-{}.csv", t.name)), &table_csv(t)?)?);
        }
    }
    if formats.contains(&Format::Svg) {
        for c in &r.charts {
            written.push(write(dir.join(format!("{stem}-{}.svg", c.name())), svg::render(c).as_bytes())?);
        }
    }
    Ok(written)
}
